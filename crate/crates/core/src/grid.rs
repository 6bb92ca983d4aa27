//! Staggered dual grid, the per-step state, and piecewise-constant initial data.
//!
//! Densities `n` and deviators `P` live on the `N + 1` nodes
//! `x_ℓ = x_min + ℓ·dx`; fluxes `J` live on the `N` half-nodes between them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homs;
use crate::mixture::MixtureSpec;
use crate::{Model, Tolerances};

/// Uniform 1D node/half-node layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    /// Number of node intervals `N`.
    pub intervals: usize,
}

impl GridSpec {
    pub fn node_count(&self) -> usize {
        self.intervals + 1
    }

    pub fn half_count(&self) -> usize {
        self.intervals
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn node(&self, l: usize) -> f64 {
        self.x_min + l as f64 * self.dx
    }

    pub fn half_node(&self, l: usize) -> f64 {
        self.x_min + (l as f64 + 0.5) * self.dx
    }

    pub fn node_positions(&self) -> Vec<f64> {
        (0..self.node_count()).map(|l| self.node(l)).collect()
    }

    pub fn half_positions(&self) -> Vec<f64> {
        (0..self.half_count()).map(|l| self.half_node(l)).collect()
    }

    /// Control-volume widths: `dx` inside, `dx/2` on the two boundary nodes.
    /// These are the trapezoidal quadrature weights.
    pub fn node_weight(&self, l: usize) -> f64 {
        if l == 0 || l == self.intervals {
            0.5 * self.dx
        } else {
            self.dx
        }
    }
}

/// Builds the grid; `dx` must divide the interval to relative 1e-9.
pub fn build_grid(x_min: f64, x_max: f64, dx: f64) -> Result<GridSpec> {
    if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
        return Err(Error::Config(format!("grid requires x_min < x_max, got [{x_min}, {x_max}]")));
    }
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::Config(format!("grid spacing must be positive, got {dx}")));
    }
    let length = x_max - x_min;
    let ratio = length / dx;
    let intervals = ratio.round();
    let residual = (intervals * dx - length).abs() / length;
    if residual > 1e-9 {
        return Err(Error::Config(format!(
            "dx = {dx} does not divide [{x_min}, {x_max}] (relative residual {residual:.3e})"
        )));
    }
    if intervals < 2.0 {
        return Err(Error::Config(format!("grid needs at least 2 intervals, got {intervals}")));
    }
    Ok(GridSpec { x_min, x_max, dx, intervals: intervals as usize })
}

/// Number densities and deviators at nodes, fluxes at half-nodes.
/// Indexed `[species][position]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureState {
    pub time: f64,
    pub n: Vec<Vec<f64>>,
    pub j: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
}

impl MixtureState {
    pub fn species_count(&self) -> usize {
        self.n.len()
    }

    pub fn node_count(&self) -> usize {
        self.n.first().map_or(0, Vec::len)
    }

    /// Densities of every species at node `l`.
    pub fn node_densities(&self, l: usize) -> Vec<f64> {
        self.n.iter().map(|ni| ni[l]).collect()
    }

    pub fn node_deviators(&self, l: usize) -> Vec<f64> {
        self.p.iter().map(|pi| pi[l]).collect()
    }

    /// Largest `|Σ_i n_i − n_ref|` over the nodes.
    pub fn max_closure_defect(&self, n_ref: f64) -> f64 {
        (0..self.node_count()).map(|l| (self.n.iter().map(|ni| ni[l]).sum::<f64>() - n_ref).abs()).fold(0.0, f64::max)
    }

    /// Largest `|Σ_i J_i|` over the half-nodes.
    pub fn max_flux_defect(&self) -> f64 {
        let halves = self.j.first().map_or(0, Vec::len);
        (0..halves).map(|l| self.j.iter().map(|ji| ji[l]).sum::<f64>().abs()).fold(0.0, f64::max)
    }

    /// Image under `x → x_min + x_max − x` with species relabelled so that new
    /// species `k` is old species `order[k]`. Fluxes change sign.
    pub fn mirrored(&self, order: &[usize]) -> Self {
        let flip = |v: &Vec<f64>| v.iter().rev().copied().collect::<Vec<_>>();
        Self {
            time: self.time,
            n: order.iter().map(|&k| flip(&self.n[k])).collect(),
            j: order.iter().map(|&k| self.j[k].iter().rev().map(|v| -v).collect()).collect(),
            p: order.iter().map(|&k| flip(&self.p[k])).collect(),
        }
    }
}

/// Sets the last species to `n_ref − Σ_{i<S} n_i` at every node.
pub(crate) fn close_last_species(n: &mut [Vec<f64>], n_ref: f64) {
    let Some((last, rest)) = n.split_last_mut() else { return };
    for (l, v) in last.iter_mut().enumerate() {
        let partial: f64 = rest.iter().map(|ni| ni[l]).sum();
        *v = n_ref - partial;
    }
}

/// One constant piece `[start, end] → value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

/// Value assigned to a node that sits exactly on a jump between two segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterfaceRule {
    /// Value of the segment on the left.
    Left,
    /// Mean of the two adjacent segment values. With this rule the
    /// trapezoidal integral of the sampled profile equals the exact integral
    /// of the step function whenever jumps fall on nodes.
    #[default]
    Average,
}

/// How the deviators are initialised for the higher-order model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviatorInit {
    /// Solve the algebraic deviator system from the initial densities.
    #[default]
    Algebraic,
    /// Start from `P = 0`.
    Zero,
}

/// Piecewise-constant densities, one segment list per species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub species: Vec<Vec<Segment>>,
    #[serde(default)]
    pub interface_rule: InterfaceRule,
}

impl InitialCondition {
    /// Spatially constant densities.
    pub fn uniform(values: &[f64], x_min: f64, x_max: f64) -> Self {
        Self {
            species: values.iter().map(|&value| vec![Segment { start: x_min, end: x_max, value }]).collect(),
            interface_rule: InterfaceRule::default(),
        }
    }

    /// Two-bulb start on `[0, 1]`: species 1 fills the left half, species 3
    /// the right half, species 2 is uniform.
    pub fn duncan_toor() -> Self {
        let seg = |start, end, value| Segment { start, end, value };
        Self {
            species: vec![
                vec![seg(0.0, 0.5, 0.8), seg(0.5, 1.0, 0.0)],
                vec![seg(0.0, 1.0, 0.2)],
                vec![seg(0.0, 0.5, 0.0), seg(0.5, 1.0, 0.8)],
            ],
            interface_rule: InterfaceRule::default(),
        }
    }

    pub fn with_interface_rule(mut self, rule: InterfaceRule) -> Self {
        self.interface_rule = rule;
        self
    }

    /// Segments must be ordered, contiguous, and cover the grid interval.
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let tol = 1e-9 * grid.length();
        for (i, segs) in self.species.iter().enumerate() {
            let (Some(first), Some(last)) = (segs.first(), segs.last()) else {
                return Err(Error::Config(format!("species {} has no segments", i + 1)));
            };
            if (first.start - grid.x_min).abs() > tol || (last.end - grid.x_max).abs() > tol {
                return Err(Error::Config(format!(
                    "segments of species {} do not cover [{}, {}]",
                    i + 1,
                    grid.x_min,
                    grid.x_max
                )));
            }
            for (k, s) in segs.iter().enumerate() {
                if s.end <= s.start || s.end.is_nan() || s.start.is_nan() || !s.value.is_finite() {
                    return Err(Error::Config(format!("species {} segment {k} is malformed", i + 1)));
                }
                if k > 0 && (segs[k - 1].end - s.start).abs() > tol {
                    return Err(Error::Config(format!(
                        "species {} segments {} and {k} are not contiguous",
                        i + 1,
                        k - 1
                    )));
                }
            }
        }
        Ok(())
    }

    fn sample(&self, species: usize, x: f64, tol: f64) -> f64 {
        let segs = &self.species[species];
        let mut hits = segs.iter().filter(|s| x >= s.start - tol && x <= s.end + tol);
        let first = hits.next().expect("validated segments cover the grid");
        match (hits.next(), self.interface_rule) {
            (None, _) | (Some(_), InterfaceRule::Left) => first.value,
            (Some(second), InterfaceRule::Average) => 0.5 * (first.value + second.value),
        }
    }
}

/// Samples the initial condition on the nodes and sets `J = 0`.
///
/// For the higher-order model the deviators are either solved from the
/// sampled densities or set to zero, depending on `deviator_init`.
pub fn initial_state(
    grid: &GridSpec,
    ic: &InitialCondition,
    spec: &MixtureSpec,
    model: Model,
    deviator_init: DeviatorInit,
    tol: &Tolerances,
) -> Result<MixtureState> {
    let s = spec.species_count();
    if ic.species.len() != s {
        return Err(Error::Config(format!("initial condition has {} species, mixture has {s}", ic.species.len())));
    }
    ic.validate(grid)?;

    let tol_x = 1e-9 * grid.length();
    let mut n: Vec<Vec<f64>> =
        (0..s).map(|i| (0..grid.node_count()).map(|l| ic.sample(i, grid.node(l), tol_x)).collect()).collect();

    for l in 0..grid.node_count() {
        let total: f64 = n.iter().map(|ni| ni[l]).sum();
        if (total - spec.n_ref).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "species densities at node {l} (x = {}) sum to {total}, expected n_ref = {}",
                grid.node(l),
                spec.n_ref
            )));
        }
        if let Some(i) = n.iter().position(|ni| ni[l] < 0.0) {
            return Err(Error::Config(format!("negative initial density for species {} at node {l}", i + 1)));
        }
    }
    close_last_species(&mut n, spec.n_ref);

    let p = match (model, deviator_init) {
        (Model::Homs, DeviatorInit::Algebraic) => homs::deviator_field(&n, spec, tol.singular, 0.0)?,
        _ => vec![vec![0.0; grid.node_count()]; s],
    };

    Ok(MixtureState { time: 0.0, n, j: vec![vec![0.0; grid.half_count()]; s], p })
}

/// Arithmetic mean of neighbouring nodes.
pub fn midpoint_densities(nodes: &[f64]) -> Vec<f64> {
    nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}
