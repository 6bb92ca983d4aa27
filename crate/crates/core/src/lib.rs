//! One-dimensional multicomponent gas diffusion with the classical
//! Maxwell-Stefan model and its higher-order extension carrying deviatoric
//! partial pressures.
//!
//! Both models share an explicit scheme on a staggered grid: fluxes are
//! solved at half-nodes from the momentum balance, densities are updated
//! conservatively at nodes, and the last species follows from the closure
//! `Σ n_i = n_ref`. The higher-order model adds a per-node algebraic solve for
//! the deviators.

pub mod densesolve;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod homs;
pub mod mixture;
pub mod ms;
pub mod simulate;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use grid::{GridSpec, MixtureState};
pub use mixture::{MixtureSpec, PhysicalMixture};

/// Which momentum balance drives the fluxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Classical Maxwell-Stefan.
    Ms,
    /// Higher-order Maxwell-Stefan with deviatoric pressures.
    Homs,
}

impl Model {
    pub fn step(
        self,
        state: &MixtureState,
        spec: &MixtureSpec,
        grid: &GridSpec,
        dt: f64,
        tol: &Tolerances,
    ) -> Result<MixtureState> {
        match self {
            Model::Ms => ms::ms_step(state, spec, grid, dt, tol),
            Model::Homs => homs::homs_step(state, spec, grid, dt, tol),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Ms => "ms",
            Model::Homs => "homs",
        }
    }
}

/// Numerical tolerances shared by the steppers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative pivot threshold of the dense solves.
    pub singular: f64,
    /// Densities below `-positivity` abort the run.
    pub positivity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { singular: 1e-12, positivity: 1e-12 }
    }
}
