//! Invariant checks, stability numbers and run-to-run comparison metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, MixtureState};
use crate::homs::{deviator_residual, total_pressure};
use crate::mixture::MixtureSpec;
use crate::simulate::{RunReport, Snapshot};
use crate::Model;

/// Explicit-diffusion stability limit on `D·dt/dx²`.
pub const CFL_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CflReport {
    pub number: f64,
    pub limit: f64,
    pub flagged: bool,
}

/// `max D · dt / dx²` over binary and self-diffusivities, flagged above 0.5.
pub fn cfl_number(spec: &MixtureSpec, dt: f64, dx: f64) -> CflReport {
    let number = spec.max_diffusivity() * dt / (dx * dx);
    CflReport { number, limit: CFL_LIMIT, flagged: number > CFL_LIMIT }
}

/// Trapezoidal integral of each species' density.
pub fn total_mass(state: &MixtureState, grid: &GridSpec) -> Vec<f64> {
    state.n.iter().map(|ni| ni.iter().enumerate().map(|(l, v)| grid.node_weight(l) * v).sum()).collect()
}

/// The uniform state carrying the same mass as `state`.
pub fn asymptotic_state(state: &MixtureState, grid: &GridSpec) -> Vec<f64> {
    total_mass(state, grid).into_iter().map(|m| m / grid.length()).collect()
}

/// L∞ and trapezoidal L² norms of a difference.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Distance {
    pub linf: f64,
    pub l2: f64,
}

impl Distance {
    fn of(diff: impl Iterator<Item = (f64, f64)>) -> Self {
        let (linf, sq) = diff.fold((0.0_f64, 0.0), |(m, s), (w, d)| (m.max(d.abs()), s + w * d * d));
        Self { linf, l2: sq.sqrt() }
    }
}

/// Distance of every species to the constant `n_inf[i]`.
pub fn equilibrium_distance(state: &MixtureState, n_inf: &[f64], grid: &GridSpec) -> Vec<Distance> {
    state
        .n
        .iter()
        .zip(n_inf)
        .map(|(ni, c)| Distance::of(ni.iter().enumerate().map(|(l, v)| (grid.node_weight(l), v - c))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UphillMetric {
    /// Largest `|n_i − initial_value|` over snapshots and nodes.
    pub max_deviation: f64,
    pub time: f64,
    /// Profile extrema at that time.
    pub profile_min: f64,
    pub profile_max: f64,
}

pub fn uphill_metric(history: &[Snapshot], species: usize, initial_value: f64) -> Result<UphillMetric> {
    let first = history.first().ok_or(Error::EmptyHistory)?;
    let mut best = (f64::NEG_INFINITY, first);
    for snap in history {
        let dev = snap.state.n[species].iter().fold(0.0_f64, |m, v| m.max((v - initial_value).abs()));
        if dev > best.0 {
            best = (dev, snap);
        }
    }
    let profile = &best.1.state.n[species];
    Ok(UphillMetric {
        max_deviation: best.0,
        time: best.1.time,
        profile_min: profile.iter().copied().fold(f64::INFINITY, f64::min),
        profile_max: profile.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// `max_ℓ |v_ℓ − v_{N−ℓ}|`: zero for a profile symmetric about the midpoint.
pub fn reflection_asymmetry(profile: &[f64]) -> f64 {
    profile.iter().zip(profile.iter().rev()).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// Largest scaled residual of the deviator system over the nodes.
pub fn max_deviator_residual(state: &MixtureState, spec: &MixtureSpec) -> f64 {
    (0..state.node_count())
        .map(|l| deviator_residual(&state.node_densities(l), &state.node_deviators(l), spec))
        .fold(0.0, f64::max)
}

/// `max_ℓ |Σ_i P_i(ℓ+1) − Σ_i P_i(ℓ)| / dx`.
pub fn deviator_sum_gradient(state: &MixtureState, grid: &GridSpec) -> f64 {
    let sums: Vec<f64> = (0..state.node_count()).map(|l| state.p.iter().map(|pi| pi[l]).sum()).collect();
    sums.windows(2).map(|w| ((w[1] - w[0]) / grid.dx).abs()).fold(0.0, f64::max)
}

/// One row of the diagnostic trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: f64,
    pub mass: Vec<f64>,
    pub max_closure_defect: f64,
    pub equilibrium_distance: Vec<Distance>,
    pub deviator_residual: Option<f64>,
    pub deviator_sum_gradient: Option<f64>,
    pub cfl: f64,
}

pub fn trace_record(
    time: f64,
    state: &MixtureState,
    grid: &GridSpec,
    spec: &MixtureSpec,
    model: Model,
    n_inf: &[f64],
    cfl: f64,
) -> TraceRecord {
    let homs = model == Model::Homs;
    TraceRecord {
        time,
        mass: total_mass(state, grid),
        max_closure_defect: state.max_closure_defect(spec.n_ref),
        equilibrium_distance: equilibrium_distance(state, n_inf, grid),
        deviator_residual: homs.then(|| max_deviator_residual(state, spec)),
        deviator_sum_gradient: homs.then(|| deviator_sum_gradient(state, grid)),
        cfl,
    }
}

/// Per-species differences of densities, fluxes and total pressures.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpeciesDifference {
    pub n: Distance,
    pub j: Distance,
    pub p_total: Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunComparison {
    pub time: f64,
    pub species: Vec<SpeciesDifference>,
}

impl RunComparison {
    /// Largest L∞ density difference over species.
    pub fn max_density_gap(&self) -> f64 {
        self.species.iter().map(|d| d.n.linf).fold(0.0, f64::max)
    }

    /// Largest L∞ difference over all fields and species.
    pub fn max_gap(&self) -> f64 {
        self.species.iter().map(|d| d.n.linf.max(d.j.linf).max(d.p_total.linf)).fold(0.0, f64::max)
    }
}

/// Snapshot index at `t`, preferring an exact match, else the nearest.
pub fn nearest_snapshot(snapshots: &[Snapshot], t: f64) -> Option<usize> {
    if let Some(k) = snapshots.iter().position(|s| s.time == t) {
        return Some(k);
    }
    snapshots.iter().enumerate().min_by(|a, b| (a.1.time - t).abs().total_cmp(&(b.1.time - t).abs())).map(|(k, _)| k)
}

/// Differences between two runs on the same grid and schedule at the
/// snapshot nearest `t`.
pub fn compare_runs(a: &RunReport, b: &RunReport, t: f64) -> Result<RunComparison> {
    if a.grid != b.grid {
        return Err(Error::Comparison("runs use different grids".into()));
    }
    let times = |r: &RunReport| r.snapshots.iter().map(|s| s.time).collect::<Vec<_>>();
    if times(a) != times(b) {
        return Err(Error::Comparison("runs use different snapshot schedules".into()));
    }
    if a.spec.species_count() != b.spec.species_count() {
        return Err(Error::Comparison("runs have different species counts".into()));
    }
    let k = nearest_snapshot(&a.snapshots, t).ok_or(Error::EmptyHistory)?;
    let (sa, sb) = (&a.snapshots[k].state, &b.snapshots[k].state);
    let grid = &a.grid;

    let ptot = |r: &RunReport, st: &MixtureState| -> Vec<Vec<f64>> {
        let cols: Vec<Vec<f64>> = (0..st.node_count())
            .map(|l| total_pressure(&st.node_densities(l), &st.node_deviators(l), r.spec.kappa, r.spec.temperature))
            .collect();
        (0..st.species_count()).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
    };
    let (pa, pb) = (ptot(a, sa), ptot(b, sb));

    let node_diff = |x: &[f64], y: &[f64]| {
        Distance::of(x.iter().zip(y).enumerate().map(|(l, (u, v))| (grid.node_weight(l), u - v)))
    };
    let half_diff = |x: &[f64], y: &[f64]| Distance::of(x.iter().zip(y).map(|(u, v)| (grid.dx, u - v)));

    let species = (0..sa.species_count())
        .map(|i| SpeciesDifference {
            n: node_diff(&sa.n[i], &sb.n[i]),
            j: half_diff(&sa.j[i], &sb.j[i]),
            p_total: node_diff(&pa[i], &pb[i]),
        })
        .collect();
    Ok(RunComparison { time: a.snapshots[k].time, species })
}
