//! Time loop: advances a state with the selected model, records snapshots on
//! a fixed schedule and a diagnostic trace alongside them.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{asymptotic_state, cfl_number, trace_record, CflReport, TraceRecord};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, MixtureState};
use crate::mixture::MixtureSpec;
use crate::{Model, Tolerances};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Requested snapshot time, reported verbatim.
    pub time: f64,
    pub step: usize,
    pub state: MixtureState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: Model,
    pub spec: MixtureSpec,
    pub grid: GridSpec,
    pub dt: f64,
    pub steps_taken: usize,
    pub cfl: CflReport,
    /// Uniform state with the initial per-species mass.
    pub asymptote: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub trace: Vec<TraceRecord>,
    pub complete: bool,
}

impl RunReport {
    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        crate::diagnostics::nearest_snapshot(&self.snapshots, t).map(|k| &self.snapshots[k])
    }
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub partial: Box<RunReport>,
    pub error: Error,
}

/// Maps snapshot times to step indices. Every time, and `t_end`, must be a
/// multiple of `dt` to relative 1e-9; times must be sorted and in `[0, t_end]`.
pub fn snapshot_schedule(times: &[f64], dt: f64, t_end: f64) -> Result<(Vec<(usize, f64)>, usize)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Config(format!("t_end must be positive, got {t_end}")));
    }
    let to_step = |t: f64, what: &str| -> Result<usize> {
        let k = (t / dt).round();
        if (k * dt - t).abs() > 1e-9 * t.max(dt) {
            return Err(Error::Config(format!("{what} = {t} is not a multiple of dt = {dt}")));
        }
        Ok(k as usize)
    };
    let total = to_step(t_end, "t_end")?;
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(times.len());
    for &t in times {
        if !(0.0..=t_end).contains(&t) {
            return Err(Error::Config(format!("snapshot time {t} outside [0, {t_end}]")));
        }
        if out.last().is_some_and(|&(_, prev)| t <= prev) {
            return Err(Error::Config(format!("snapshot times must be strictly increasing at {t}")));
        }
        out.push((to_step(t, "snapshot time")?, t));
    }
    Ok((out, total))
}

/// Everything a run needs besides the initial state.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub model: Model,
    pub spec: MixtureSpec,
    pub grid: GridSpec,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub tol: Tolerances,
}

/// Advances `initial` to `t_end`, recording the scheduled snapshots.
pub fn simulate(setup: &RunSetup, initial: MixtureState) -> std::result::Result<RunReport, RunFailure> {
    let cfl = cfl_number(&setup.spec, setup.dt, setup.grid.dx);
    let asymptote = asymptotic_state(&initial, &setup.grid);
    let mut report = RunReport {
        model: setup.model,
        spec: setup.spec.clone(),
        grid: setup.grid.clone(),
        dt: setup.dt,
        steps_taken: 0,
        cfl,
        asymptote,
        snapshots: Vec::new(),
        trace: Vec::new(),
        complete: false,
    };
    let fail = |report: RunReport, error: Error| RunFailure { partial: Box::new(report), error };

    let (schedule, total_steps) = match snapshot_schedule(&setup.snapshot_times, setup.dt, setup.t_end) {
        Ok(s) => s,
        Err(e) => return Err(fail(report, e)),
    };

    let mut state = initial;
    let mut pending = schedule.into_iter().peekable();
    for step in 0..=total_steps {
        if step > 0 {
            match setup.model.step(&state, &setup.spec, &setup.grid, setup.dt, &setup.tol) {
                Ok(mut next) => {
                    next.time = step as f64 * setup.dt;
                    state = next;
                    report.steps_taken = step;
                }
                Err(e) => return Err(fail(report, e)),
            }
        }
        while let Some(&(k, t)) = pending.peek() {
            if k != step {
                break;
            }
            pending.next();
            report.trace.push(trace_record(
                t,
                &state,
                &setup.grid,
                &setup.spec,
                setup.model,
                &report.asymptote,
                cfl.number,
            ));
            report.snapshots.push(Snapshot { time: t, step, state: state.clone() });
        }
    }
    report.complete = true;
    Ok(report)
}
