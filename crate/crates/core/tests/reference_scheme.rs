//! Cross-checks the steppers against a direct transcription of the scheme
//! that keeps all species, imposes `Σ J = 0` as an extra equation and solves
//! with Cramer's rule, and computes deviators from the kinetic moment form.

mod common;

use std::f64::consts::PI;

use common::*;
use msdiff::diagnostics::{asymptotic_state, equilibrium_distance};
use msdiff::grid::InitialCondition;
use msdiff::{MixtureSpec, Model};

type V3 = [f64; 3];
type M3 = [[f64; 3]; 3];

fn det3(a: &M3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn cramer(a: &M3, b: &V3) -> V3 {
    let d = det3(a);
    let mut x = [0.0; 3];
    for (c, xc) in x.iter_mut().enumerate() {
        let mut ac = *a;
        for r in 0..3 {
            ac[r][c] = b[r];
        }
        *xc = det3(&ac) / d;
    }
    x
}

/// Deviators from mass densities, pressures and cross-section moments.
fn kinetic_deviator(n: &V3, spec: &MixtureSpec) -> V3 {
    let m = &spec.masses;
    let kt = spec.kappa_t();
    let b = |i: usize, j: usize| spec.cross_section_norms[(i, j)];
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
            let moment = spec.gamma[(i, j)] * b(i, j);
            beta[i] += PI / mij2
                * (b(i, j) * ((m[j] - 4.0 * m[i]) * rho[j] * p[i] + 5.0 * m[j] * rho[i] * p[j])
                    - 3.0 * m[j] * moment * (rho[j] * p[i] + rho[i] * p[j]));
        }
        mat[i][i] += 2.0 * PI * b(i, i) * m[i] * rho[i] / (4.0 * m[i] * m[i]);
    }
    let mut out = cramer(&mat, &beta);
    for v in &mut out {
        *v /= kt;
    }
    out
}

/// One explicit step of the full three-species system. Boundary nodes carry
/// half-width cells.
fn reference_step(n: &[V3], p: &[V3], spec: &MixtureSpec, dx: f64, dt: f64, homs: bool) -> (Vec<V3>, Vec<V3>) {
    let d = |i: usize, j: usize| spec.diffusivities[(i, j)];
    let nodes = n.len();
    let mut fluxes = Vec::with_capacity(nodes - 1);
    for l in 0..nodes - 1 {
        let mid: V3 = std::array::from_fn(|i| 0.5 * (n[l][i] + n[l + 1][i]));
        let mut a = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for i in 0..2 {
            for j in 0..3 {
                if j != i {
                    a[i][j] += mid[i] / d(i, j);
                    a[i][i] -= mid[j] / d(i, j);
                }
            }
            rhs[i] = (n[l + 1][i] - n[l][i]) / dx;
            if homs {
                rhs[i] += (p[l + 1][i] - p[l][i]) / dx;
            }
        }
        a[2] = [1.0; 3];
        fluxes.push(cramer(&a, &rhs));
    }
    let mut next = n.to_vec();
    for l in 0..nodes {
        let width = if l == 0 || l == nodes - 1 { 0.5 * dx } else { dx };
        for i in 0..3 {
            let right = if l < nodes - 1 { fluxes[l][i] } else { 0.0 };
            let left = if l > 0 { fluxes[l - 1][i] } else { 0.0 };
            next[l][i] = n[l][i] - dt / width * (right - left);
        }
    }
    let p_next = if homs { next.iter().map(|v| kinetic_deviator(v, spec)).collect() } else { vec![[0.0; 3]; nodes] };
    (next, p_next)
}

fn reference_run(spec: &MixtureSpec, ic: &InitialCondition, homs: bool, steps: usize) -> Vec<V3> {
    let st = start_with(spec, Model::Ms, ic);
    let mut n: Vec<V3> = (0..st.node_count()).map(|l| std::array::from_fn(|i| st.n[i][l])).collect();
    let mut p: Vec<V3> =
        if homs { n.iter().map(|v| kinetic_deviator(v, spec)).collect() } else { vec![[0.0; 3]; n.len()] };
    for _ in 0..steps {
        (n, p) = reference_step(&n, &p, spec, 0.05, DT, homs);
    }
    n
}

fn by_species(nodes: &[V3]) -> Vec<Vec<f64>> {
    (0..3).map(|i| nodes.iter().map(|v| v[i]).collect()).collect()
}

#[test]
fn ms_trajectory_matches_full_system() {
    let spec = spec();
    let g = grid();
    let lib = advance(Model::Ms, &start(&spec, Model::Ms), &spec, &g, DT, 181);
    let reference = by_species(&reference_run(&spec, &InitialCondition::duncan_toor(), false, 181));
    assert!(max_gap(&lib.n, &reference) < 1e-10, "gap {}", max_gap(&lib.n, &reference));
}

#[test]
fn homs_trajectory_matches_full_system() {
    let spec = spec();
    let g = grid();
    let lib = advance(Model::Homs, &start(&spec, Model::Homs), &spec, &g, DT, 181);
    let reference = by_species(&reference_run(&spec, &InitialCondition::duncan_toor(), true, 181));
    assert!(max_gap(&lib.n, &reference) < 1e-10, "gap {}", max_gap(&lib.n, &reference));
}

#[test]
fn homs_with_distinct_pair_gammas_matches_full_system() {
    let gamma =
        msdiff::densesolve::Matrix::from_rows(&[vec![0.05, 0.2, 0.1], vec![0.2, 0.3, 0.15], vec![0.1, 0.15, 0.25]])
            .unwrap();
    let spec = spec().with_gamma(gamma).unwrap();
    let g = grid();
    let ic = diluted_bulbs();
    let lib = advance(Model::Homs, &start_with(&spec, Model::Homs, &ic), &spec, &g, DT, 181);
    let reference = by_species(&reference_run(&spec, &ic, true, 181));
    assert!(max_gap(&lib.n, &reference) < 1e-10, "gap {}", max_gap(&lib.n, &reference));
}

/// Distances at t = 0.0362 from an independent float64 script of the same
/// scheme, rounded to five digits.
#[test]
fn distances_at_reference_time() {
    let spec = spec();
    let g = grid();
    for (model, expected) in [(Model::Ms, [0.32049, 0.05368, 0.36870]), (Model::Homs, [0.36693, 0.03784, 0.39140])] {
        let s0 = start(&spec, model);
        let n_inf = asymptotic_state(&s0, &g);
        let st = advance(model, &s0, &spec, &g, DT, 181);
        let d = equilibrium_distance(&st, &n_inf, &g);
        for i in 0..3 {
            assert!((d[i].linf - expected[i]).abs() < 1e-4, "{model:?} species {}: {}", i + 1, d[i].linf);
        }
    }
}

/// Peak of `max_x |n₂ − 0.2|` over every step of the classical run, recorded
/// from the full-system transcription to three significant figures.
#[test]
fn uphill_peak_of_the_middle_species() {
    let spec = spec();
    let g = grid();
    let tol = msdiff::Tolerances::default();
    let st0 = start(&spec, Model::Ms);
    let mut n: Vec<V3> = (0..st0.node_count()).map(|l| std::array::from_fn(|i| st0.n[i][l])).collect();
    let mut p = vec![[0.0; 3]; n.len()];
    let mut st = st0;
    let (mut oracle_peak, mut lib_peak, mut peak_step) = (0.0_f64, 0.0_f64, 0);
    for step in 1..=1500 {
        (n, p) = reference_step(&n, &p, &spec, 0.05, DT, false);
        st = Model::Ms.step(&st, &spec, &g, DT, &tol).unwrap();
        let dev = n.iter().fold(0.0_f64, |m, v| m.max((v[1] - 0.2).abs()));
        if dev > oracle_peak {
            (oracle_peak, peak_step) = (dev, step);
        }
        lib_peak = st.n[1].iter().fold(lib_peak, |m, v| m.max((v - 0.2).abs()));
    }
    assert!((oracle_peak - 0.0832).abs() < 5e-5, "{oracle_peak}");
    assert!((lib_peak - oracle_peak).abs() <= 1e-10);
    assert!((400..600).contains(&peak_step), "{peak_step}");
}
