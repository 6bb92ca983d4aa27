//! Explicit step of the classical Maxwell-Stefan system.
//!
//! At each half-node the momentum balance
//!
//! ```text
//! Σ_{j≠i} (n_i J_j − n_j J_i) / D_ij = ∂x n_i
//! ```
//!
//! is closed with `Σ J_i = 0` and `Σ n_i = n_ref`, eliminating the last
//! species. Row `i < S` of the reduced `(S−1)×(S−1)` system reads
//!
//! ```text
//! A_ij = (1/D_ij − 1/D_iS) n_i                         (j ≠ i)
//! A_ii = −n_ref/D_iS + Σ_{k≠i, k<S} (1/D_iS − 1/D_ik) n_k
//! ```
//!
//! and the densities are then advanced with the conservative update.

use serde::{Deserialize, Serialize};

use crate::densesolve::{solve_dense, Matrix};
use crate::error::{Error, Result};
use crate::grid::{close_last_species, midpoint_densities, GridSpec, MixtureState};
use crate::mixture::MixtureSpec;
use crate::Tolerances;

/// Reduced flux system at one half-node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxSystem {
    pub matrix: Matrix,
    pub rhs: Vec<f64>,
}

/// `(S−1)×(S−1)` flux matrix at a half-node with densities `n_half` (all `S`).
pub fn flux_matrix(n_half: &[f64], spec: &MixtureSpec) -> Matrix {
    let s = spec.species_count();
    let last = s - 1;
    let d = &spec.diffusivities;
    debug_assert_eq!(n_half.len(), s);
    Matrix::from_fn(last, |i, j| {
        let inv_is = 1.0 / d[(i, last)];
        if i == j {
            let cross: f64 = (0..last).filter(|&k| k != i).map(|k| (inv_is - 1.0 / d[(i, k)]) * n_half[k]).sum();
            -spec.n_ref * inv_is + cross
        } else {
            (1.0 / d[(i, j)] - inv_is) * n_half[i]
        }
    })
}

/// Assembles the reduced system; `grad_n` holds the gradients of the first
/// `S − 1` species (extra entries are ignored). Self-diffusivities do not enter.
pub fn assemble_flux_system(n_half: &[f64], grad_n: &[f64], spec: &MixtureSpec) -> FluxSystem {
    let last = spec.species_count() - 1;
    FluxSystem { matrix: flux_matrix(n_half, spec), rhs: grad_n[..last].to_vec() }
}

/// Density differences `(n_{ℓ+1} − n_ℓ)/dx` of the first `S − 1` species,
/// one vector per half-node.
pub fn density_gradients(state: &MixtureState, grid: &GridSpec) -> Vec<Vec<f64>> {
    let last = state.species_count() - 1;
    (0..grid.half_count()).map(|l| (0..last).map(|i| (state.n[i][l + 1] - state.n[i][l]) / grid.dx).collect()).collect()
}

/// Solves the flux system at every half-node for the given right-hand sides
/// and completes the last species from the closure. Returns `[species][half]`.
pub(crate) fn solve_flux_systems(
    state: &MixtureState,
    rhs: &[Vec<f64>],
    spec: &MixtureSpec,
    grid: &GridSpec,
    singular_tol: f64,
) -> Result<Vec<Vec<f64>>> {
    let s = spec.species_count();
    let halves: Vec<Vec<f64>> = state.n.iter().map(|ni| midpoint_densities(ni)).collect();
    let mut fluxes = vec![vec![0.0; grid.half_count()]; s];

    for (l, b) in rhs.iter().enumerate() {
        let n_half: Vec<f64> = halves.iter().map(|h| h[l]).collect();
        let a = flux_matrix(&n_half, spec);
        let solved = solve_dense(&a, b, singular_tol).map_err(|e| match e {
            Error::Singular { pivot } => Error::SingularFlux { half_node: l, time: state.time, pivot },
            other => other,
        })?;
        let mut closure = 0.0;
        for (i, v) in solved.into_iter().enumerate() {
            fluxes[i][l] = v;
            closure += v;
        }
        fluxes[s - 1][l] = -closure;
    }
    Ok(fluxes)
}

/// Fluxes at all half-nodes driven by the density gradients alone.
pub fn solve_fluxes(
    state: &MixtureState,
    spec: &MixtureSpec,
    grid: &GridSpec,
    singular_tol: f64,
) -> Result<Vec<Vec<f64>>> {
    solve_flux_systems(state, &density_gradients(state, grid), spec, grid, singular_tol)
}

/// Conservative density update with zero-flux walls.
///
/// Interior nodes own a cell of width `dx`, the two boundary nodes a half
/// cell of width `dx/2`, so the trapezoidal mass of every species is
/// conserved exactly. The last species is recovered from `Σ n_i = n_ref`.
pub fn update_densities(
    state: &MixtureState,
    fluxes: &[Vec<f64>],
    dt: f64,
    grid: &GridSpec,
    spec: &MixtureSpec,
    positivity_tol: f64,
) -> Result<Vec<Vec<f64>>> {
    let s = state.species_count();
    let nodes = grid.node_count();
    let new_time = state.time + dt;
    let mut n = state.n.clone();

    for i in 0..s - 1 {
        let flux = &fluxes[i];
        for (l, v) in n[i].iter_mut().enumerate() {
            let right = if l < grid.half_count() { flux[l] } else { 0.0 };
            let left = if l > 0 { flux[l - 1] } else { 0.0 };
            *v -= dt / grid.node_weight(l) * (right - left);
        }
    }
    close_last_species(&mut n, spec.n_ref);

    for (i, ni) in n.iter().enumerate() {
        if let Some(l) = (0..nodes).find(|&l| ni[l] < -positivity_tol) {
            return Err(Error::Positivity { time: new_time, node: l, species: i + 1, value: ni[l] });
        }
    }
    Ok(n)
}

/// One explicit step of the classical model. Deviators stay zero.
pub fn ms_step(
    state: &MixtureState,
    spec: &MixtureSpec,
    grid: &GridSpec,
    dt: f64,
    tol: &Tolerances,
) -> Result<MixtureState> {
    let j = solve_fluxes(state, spec, grid, tol.singular)?;
    let n = update_densities(state, &j, dt, grid, spec, tol.positivity)?;
    Ok(MixtureState { time: state.time + dt, n, j, p: vec![vec![0.0; grid.node_count()]; spec.species_count()] })
}
