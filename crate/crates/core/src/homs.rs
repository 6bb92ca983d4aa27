//! Explicit step of the higher-order Maxwell-Stefan system.
//!
//! The momentum balance is driven by `∂x(n_i + P_i)`, where
//! `P_i = p_i,⟨11⟩ / κT` is the dimensionless deviatoric pressure. In the
//! diffusive limit `P` is slaved to the local densities through
//! `M̂ P = β̂`, with
//!
//! ```text
//! M̂_ij = n_i / ((m_i + m_j) D_ij)                                    (j ≠ i)
//! M̂_ii = −n_i / (m_i D_ii) − Σ_{j≠i} (2 + m_j/m_i) n_j / ((m_i + m_j) D_ij)
//! β̂_i  = Σ_j (1 − 3γ_ij) n_i n_j / (2 m_i D_ij)
//! ```
//!
//! so `P` is never time-stepped: each step solves the fluxes from the current
//! `n` and `P`, advances `n`, and then recomputes `P` node by node.

use serde::{Deserialize, Serialize};

use crate::densesolve::{residual_inf, solve_dense, Matrix};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, MixtureState};
use crate::mixture::MixtureSpec;
use crate::ms::{solve_flux_systems, update_densities};
use crate::Tolerances;

/// Deviator system `M̂ P = β̂` at one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviatorSystem {
    pub matrix: Matrix,
    pub rhs: Vec<f64>,
}

pub fn assemble_deviator_system(n_node: &[f64], spec: &MixtureSpec) -> DeviatorSystem {
    let s = spec.species_count();
    let m = &spec.masses;
    debug_assert_eq!(n_node.len(), s);

    let matrix = Matrix::from_fn(s, |i, j| {
        if i != j {
            n_node[i] * spec.inv_diffusivity(i, j) / (m[i] + m[j])
        } else {
            let others: f64 = (0..s)
                .filter(|&k| k != i)
                .map(|k| (2.0 + m[k] / m[i]) * n_node[k] * spec.inv_diffusivity(i, k) / (m[i] + m[k]))
                .sum();
            -n_node[i] * spec.inv_diffusivity(i, i) / m[i] - others
        }
    });
    let rhs = (0..s)
        .map(|i| {
            (0..s)
                .map(|j| {
                    (1.0 - 3.0 * spec.gamma[(i, j)]) * n_node[i] * n_node[j] * spec.inv_diffusivity(i, j) / (2.0 * m[i])
                })
                .sum()
        })
        .collect();
    DeviatorSystem { matrix, rhs }
}

/// Deviators at one node. A singular `M̂` (e.g. all densities zero) is
/// reported as [`Error::Singular`]; callers attach the node.
pub fn solve_deviator(n_node: &[f64], spec: &MixtureSpec, singular_tol: f64) -> Result<Vec<f64>> {
    let sys = assemble_deviator_system(n_node, spec);
    solve_dense(&sys.matrix, &sys.rhs, singular_tol)
}

/// `‖M̂P − β̂‖_∞ / (1 + ‖β̂‖_∞)` at one node.
pub fn deviator_residual(n_node: &[f64], p_node: &[f64], spec: &MixtureSpec) -> f64 {
    let sys = assemble_deviator_system(n_node, spec);
    let scale = 1.0 + sys.rhs.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    residual_inf(&sys.matrix, p_node, &sys.rhs) / scale
}

/// Solves the deviator system at every node; `[species][node]`.
pub fn deviator_field(n: &[Vec<f64>], spec: &MixtureSpec, singular_tol: f64, time: f64) -> Result<Vec<Vec<f64>>> {
    let s = n.len();
    let nodes = n.first().map_or(0, Vec::len);
    let mut p = vec![vec![0.0; nodes]; s];
    for l in 0..nodes {
        let n_node: Vec<f64> = n.iter().map(|ni| ni[l]).collect();
        let p_node = solve_deviator(&n_node, spec, singular_tol).map_err(|e| match e {
            Error::Singular { pivot } => Error::SingularDeviator { node: l, time, pivot },
            other => other,
        })?;
        for (i, v) in p_node.into_iter().enumerate() {
            p[i][l] = v;
        }
    }
    Ok(p)
}

/// Right-hand sides of the flux systems: density plus deviator differences
/// of the first `S − 1` species at every half-node.
pub fn homs_flux_rhs(state: &MixtureState, grid: &GridSpec) -> Vec<Vec<f64>> {
    let last = state.species_count() - 1;
    (0..grid.half_count())
        .map(|l| {
            (0..last)
                .map(|i| (state.n[i][l + 1] - state.n[i][l]) / grid.dx + (state.p[i][l + 1] - state.p[i][l]) / grid.dx)
                .collect()
        })
        .collect()
}

/// One explicit step: fluxes from the current `n` and `P`, density update,
/// then deviators from the new densities.
pub fn homs_step(
    state: &MixtureState,
    spec: &MixtureSpec,
    grid: &GridSpec,
    dt: f64,
    tol: &Tolerances,
) -> Result<MixtureState> {
    let rhs = homs_flux_rhs(state, grid);
    let j = solve_flux_systems(state, &rhs, spec, grid, tol.singular)?;
    let n = update_densities(state, &j, dt, grid, spec, tol.positivity)?;
    let time = state.time + dt;
    let p = deviator_field(&n, spec, tol.singular, time)?;
    Ok(MixtureState { time, n, j, p })
}

/// Per-species total pressure `κT (n_i + P_i)`.
pub fn total_pressure(n_node: &[f64], p_node: &[f64], kappa: f64, temperature: f64) -> Vec<f64> {
    let kt = kappa * temperature;
    n_node.iter().zip(p_node).map(|(n, p)| kt * n + kt * p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, initial_state, DeviatorInit, InitialCondition};
    use crate::mixture::{nondimensionalize, PhysicalMixture};
    use crate::ms::ms_step;
    use crate::Model;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn spec() -> MixtureSpec {
        nondimensionalize(&PhysicalMixture::duncan_toor()).unwrap()
    }

    /// Deviator system in kinetic variables (mass densities, partial
    /// pressures, cross-section norms and second moments), solved for
    /// p_⟨11⟩ by Cramer's rule and scaled by 1/κT.
    fn kinetic_oracle(n: &[f64; 3], spec: &MixtureSpec) -> [f64; 3] {
        let m = &spec.masses;
        let kt = spec.kappa_t();
        let b = |i: usize, j: usize| {
            if i == j && spec.neglect_self_diffusion {
                0.0
            } else {
                spec.cross_section_norms[(i, j)]
            }
        };
        let rho: Vec<f64> = (0..3).map(|i| m[i] * n[i]).collect();
        let p: Vec<f64> = (0..3).map(|i| kt * n[i]).collect();
        let mut mat = [[0.0; 3]; 3];
        let mut beta = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mij2 = (m[i] + m[j]).powi(2);
                if j != i {
                    mat[i][j] = 2.0 * PI * b(i, j) * m[j] * rho[i] / mij2;
                }
                mat[i][i] -= 2.0 * PI * b(i, j) * (2.0 * m[i] + m[j]) * rho[j] / mij2;
                let big_b = spec.gamma[(i, j)] * b(i, j);
                beta[i] += PI / mij2
                    * (b(i, j) * ((m[j] - 4.0 * m[i]) * rho[j] * p[i] + 5.0 * m[j] * rho[i] * p[j])
                        - 3.0 * m[j] * big_b * (rho[j] * p[i] + rho[i] * p[j]));
            }
            mat[i][i] += 2.0 * PI * b(i, i) * m[i] * rho[i] / (4.0 * m[i] * m[i]);
        }
        let det3 = |a: &[[f64; 3]; 3]| {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        };
        let d = det3(&mat);
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let mut a = mat;
            for r in 0..3 {
                a[r][c] = beta[r];
            }
            *o = det3(&a) / d / kt;
        }
        out
    }

    #[test]
    fn empty_node_has_empty_system() {
        let sys = assemble_deviator_system(&[0.0; 3], &spec());
        assert_eq!(sys.matrix.max_abs(), 0.0);
        assert!(sys.rhs.iter().all(|&v| v == 0.0));
        assert_eq!(solve_deviator(&[0.0; 3], &spec(), 1e-12).unwrap_err(), Error::Singular { pivot: 0 });
    }

    #[test]
    fn gamma_one_third_kills_the_source() {
        let spec = spec().with_uniform_gamma(1.0 / 3.0).unwrap();
        let sys = assemble_deviator_system(&[0.3, 0.5, 0.2], &spec);
        assert!(sys.rhs.iter().all(|&v| v == 0.0));
        let p = solve_deviator(&[0.4, 0.2, 0.4], &spec, 1e-12).unwrap();
        assert!(p.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn equilibrium_off_diagonal_entry() {
        let spec = spec();
        let sys = assemble_deviator_system(&[0.4, 0.2, 0.4], &spec);
        assert!((sys.matrix[(0, 1)] - 0.22124).abs() < 1e-4);
        let m = &spec.masses;
        assert!((sys.matrix[(0, 1)] - 0.4 / ((m[0] + m[1]) * spec.diffusivities[(0, 1)])).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_deviators_match_kinetic_oracle() {
        // Kinetic-variable oracle gives P = (−0.14, −0.07, −0.14) at γ = 0.1.
        let spec = spec();
        let p = solve_deviator(&[0.4, 0.2, 0.4], &spec, 1e-12).unwrap();
        let oracle = kinetic_oracle(&[0.4, 0.2, 0.4], &spec);
        for (got, want) in p.iter().zip([-0.14, -0.07, -0.14]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        for (got, want) in p.iter().zip(oracle) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let ptot = total_pressure(&[0.4, 0.2, 0.4], &p, spec.kappa, spec.temperature);
        for (got, want) in ptot.iter().zip([0.433333, 0.216667, 0.433333]) {
            assert!((got - want).abs() < 1e-6, "{got}");
        }
    }

    #[test]
    fn total_pressure_without_deviator() {
        let p = total_pressure(&[0.4], &[0.0], 5.0 / 3.0, 1.0);
        assert!((p[0] - 0.6667).abs() < 1e-4);
        assert_eq!(total_pressure(&[0.2, 0.3], &[0.0, 0.0], 2.0, 1.5), vec![0.6000000000000001, 0.8999999999999999]);
    }

    #[test]
    fn rhs_reduces_to_density_gradient_for_flat_deviators() {
        let grid = build_grid(0.0, 1.0, 0.25).unwrap();
        let mut st = MixtureState {
            time: 0.0,
            n: vec![vec![0.1, 0.2, 0.3, 0.4, 0.5], vec![0.3; 5], vec![0.6, 0.5, 0.4, 0.3, 0.2]],
            j: vec![vec![0.0; 4]; 3],
            p: vec![vec![-0.7; 5]; 3],
        };
        let rhs = homs_flux_rhs(&st, &grid);
        let ms = crate::ms::density_gradients(&st, &grid);
        assert_eq!(rhs, ms);

        st.n = vec![vec![0.2; 5], vec![0.3; 5], vec![0.5; 5]];
        st.p[0] = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let rhs = homs_flux_rhs(&st, &grid);
        assert!(rhs.iter().all(|r| r[0] == 1.0 && r[1] == 0.0));
    }

    #[test]
    fn equilibrium_with_consistent_deviators_is_stationary() {
        let spec = spec();
        let grid = build_grid(0.0, 1.0, 0.05).unwrap();
        let ic = InitialCondition::uniform(&[0.4, 0.2, 0.4], 0.0, 1.0);
        let tol = Tolerances::default();
        let st = initial_state(&grid, &ic, &spec, Model::Homs, DeviatorInit::Algebraic, &tol).unwrap();
        let next = homs_step(&st, &spec, &grid, 2e-4, &tol).unwrap();
        assert_eq!(next.n, st.n);
        assert_eq!(next.p, st.p);
        assert!(next.j.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn benchmark_interface_rhs_has_deviator_correction() {
        let spec = spec();
        let grid = build_grid(0.0, 1.0, 0.05).unwrap();
        let tol = Tolerances::default();
        let ic = InitialCondition::duncan_toor().with_interface_rule(crate::grid::InterfaceRule::Left);
        let st = initial_state(&grid, &ic, &spec, Model::Homs, DeviatorInit::Algebraic, &tol).unwrap();
        let rhs = homs_flux_rhs(&st, &grid);
        // Independent two-term evaluation at the jump between nodes 10 and 11.
        let left = kinetic_oracle(&[0.8, 0.2, 0.0], &spec);
        let right = kinetic_oracle(&[0.0, 0.2, 0.8], &spec);
        for i in 0..2 {
            let dn = (st.n[i][11] - st.n[i][10]) / 0.05;
            let dp = (right[i] - left[i]) / 0.05;
            assert!((rhs[10][i] - (dn + dp)).abs() < 1e-10, "species {i}: {} vs {}", rhs[10][i], dn + dp);
        }
        // Species 1 deviator is −0.35·n at γ = 0.1, so the correction is −0.35 of the density term.
        assert!((rhs[10][0] - 0.65 * -16.0).abs() < 1e-10);
    }

    #[test]
    fn gamma_one_third_step_matches_ms_step() {
        let spec = spec().with_uniform_gamma(1.0 / 3.0).unwrap();
        let grid = build_grid(0.0, 1.0, 0.05).unwrap();
        let tol = Tolerances::default();
        let ic = InitialCondition::duncan_toor();
        let mut a = initial_state(&grid, &ic, &spec, Model::Ms, DeviatorInit::Algebraic, &tol).unwrap();
        let mut b = initial_state(&grid, &ic, &spec, Model::Homs, DeviatorInit::Algebraic, &tol).unwrap();
        for _ in 0..50 {
            a = ms_step(&a, &spec, &grid, 2e-4, &tol).unwrap();
            b = homs_step(&b, &spec, &grid, 2e-4, &tol).unwrap();
            assert_eq!(a.n, b.n);
            assert_eq!(a.j, b.j);
            assert!(b.p.iter().flatten().all(|&v| v == 0.0));
        }
    }

    proptest! {
        #[test]
        fn deviator_solve_matches_kinetic_oracle(
            a in 0.01f64..1.0, b in 0.01f64..1.0, gamma in 0.0f64..0.5, neglect in any::<bool>(),
        ) {
            let spec = spec().with_uniform_gamma(gamma).unwrap().with_neglect_self_diffusion(neglect);
            let n = [a * (1.0 - b), b, (1.0 - a) * (1.0 - b)];
            let p = solve_deviator(&n, &spec, 1e-12).unwrap();
            prop_assert!(deviator_residual(&n, &p, &spec) <= 1e-10);
            let oracle = kinetic_oracle(&n, &spec);
            for (x, y) in p.iter().zip(oracle) {
                prop_assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()), "{} vs {}", x, y);
            }
        }

        #[test]
        fn uniform_gamma_deviator_is_proportional_to_density(
            a in 0.0f64..1.0, b in 0.01f64..1.0, gamma in 0.0f64..0.5,
        ) {
            let spec = spec().with_uniform_gamma(gamma).unwrap();
            let n = [a * (1.0 - b), b, (1.0 - a) * (1.0 - b)];
            let p = solve_deviator(&n, &spec, 1e-12).unwrap();
            let c = -(1.0 - 3.0 * gamma) / 2.0;
            for (pi, ni) in p.iter().zip(n) {
                prop_assert!((pi - c * ni).abs() <= 1e-12);
            }
        }
    }
}
