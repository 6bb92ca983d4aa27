#![allow(dead_code)]

use msdiff::grid::{build_grid, initial_state, DeviatorInit, InitialCondition, Segment};
use msdiff::mixture::nondimensionalize;
use msdiff::{GridSpec, MixtureSpec, MixtureState, Model, PhysicalMixture, Tolerances};

pub const DT: f64 = 2e-4;

pub fn spec() -> MixtureSpec {
    nondimensionalize(&PhysicalMixture::duncan_toor()).unwrap()
}

pub fn grid() -> GridSpec {
    build_grid(0.0, 1.0, 0.05).unwrap()
}

pub fn start(spec: &MixtureSpec, model: Model) -> MixtureState {
    start_with(spec, model, &InitialCondition::duncan_toor())
}

pub fn start_with(spec: &MixtureSpec, model: Model, ic: &InitialCondition) -> MixtureState {
    initial_state(&grid(), ic, spec, model, DeviatorInit::Algebraic, &Tolerances::default()).unwrap()
}

/// Two bulbs with every species present everywhere.
pub fn diluted_bulbs() -> InitialCondition {
    let seg = |start, end, value| Segment { start, end, value };
    InitialCondition {
        species: vec![
            vec![seg(0.0, 0.5, 0.6), seg(0.5, 1.0, 0.2)],
            vec![seg(0.0, 1.0, 0.2)],
            vec![seg(0.0, 0.5, 0.2), seg(0.5, 1.0, 0.6)],
        ],
        interface_rule: Default::default(),
    }
}

pub fn advance(
    model: Model,
    state: &MixtureState,
    spec: &MixtureSpec,
    grid: &GridSpec,
    dt: f64,
    steps: usize,
) -> MixtureState {
    let tol = Tolerances::default();
    let mut st = state.clone();
    for _ in 0..steps {
        st = model.step(&st, spec, grid, dt, &tol).unwrap();
    }
    st
}

pub fn max_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}
