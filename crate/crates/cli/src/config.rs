//! JSON run configuration.
//!
//! A document may name a `"preset"`; the preset is expanded to a full
//! configuration and the document's own fields are merged over it, object by
//! object. An `initial_condition` that names a new source (`preset`,
//! `uniform` or `segments`) replaces the preset's initial condition instead
//! of merging into it.
//!
//! ```json
//! {
//!   "preset": "duncan-toor",
//!   "model": "ms",
//!   "t_end": 0.1,
//!   "snapshot_times": [0.0, 0.05, 0.1],
//!   "gamma_override": 0.2
//! }
//! ```

use std::path::{Path, PathBuf};

use msdiff::densesolve::Matrix;
use msdiff::grid::{build_grid, initial_state, DeviatorInit, InitialCondition, InterfaceRule, Segment};
use msdiff::mixture::nondimensionalize;
use msdiff::simulate::{snapshot_schedule, RunSetup};
use msdiff::{GridSpec, MixtureSpec, MixtureState, Model, PhysicalMixture, Tolerances};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};

pub const DUNCAN_TOOR: &str = "duncan-toor";

/// Snapshot schedule of the benchmark preset.
pub const DUNCAN_TOOR_SNAPSHOTS: [f64; 12] = [0.0, 0.002, 0.005, 0.01, 0.02, 0.0362, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0];

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: Model,
    pub mixture: PhysicalMixture,
    pub grid: GridSpec,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub initial_condition: InitialCondition,
    /// Replaces the mixture's γ after nondimensionalization.
    pub gamma_override: Option<Matrix>,
    pub neglect_self_diffusion: bool,
    pub initial_deviator: DeviatorInit,
    pub tol: Tolerances,
    pub output_dir: Option<PathBuf>,
}

impl SimConfig {
    pub fn preset(name: &str) -> Result<Self> {
        resolve(Value::Object(Map::new()), Some(name))
    }

    /// Dimensionless mixture with overrides applied.
    pub fn spec(&self) -> msdiff::Result<MixtureSpec> {
        let mut spec = nondimensionalize(&self.mixture)?;
        if let Some(g) = &self.gamma_override {
            spec = spec.with_gamma(g.clone())?;
        }
        Ok(spec.with_neglect_self_diffusion(self.neglect_self_diffusion))
    }

    pub fn with_model(&self, model: Model) -> Self {
        Self { model, ..self.clone() }
    }

    pub fn with_uniform_gamma(&self, gamma: f64) -> Self {
        let s = self.mixture.species_count();
        Self { gamma_override: Some(Matrix::from_fn(s, |_, _| gamma)), ..self.clone() }
    }

    pub fn run_setup(&self) -> msdiff::Result<RunSetup> {
        Ok(RunSetup {
            model: self.model,
            spec: self.spec()?,
            grid: self.grid.clone(),
            dt: self.dt,
            t_end: self.t_end,
            snapshot_times: self.snapshot_times.clone(),
            tol: self.tol,
        })
    }

    pub fn initial_state(&self, spec: &MixtureSpec) -> msdiff::Result<MixtureState> {
        initial_state(&self.grid, &self.initial_condition, spec, self.model, self.initial_deviator, &self.tol)
    }

    fn validate(&self) -> Result<()> {
        let invalid = |e: msdiff::Error| CliError::Invalid(e.to_string());
        for (name, v) in [("singular_tol", self.tol.singular), ("positivity_tol", self.tol.positivity)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        snapshot_schedule(&self.snapshot_times, self.dt, self.t_end).map_err(invalid)?;
        let spec = self.spec().map_err(invalid)?;
        self.initial_state(&spec).map_err(invalid)?;
        Ok(())
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    parse_with_preset(text, None)
}

/// As [`parse_config`], with `preset` taking the place of a `"preset"` field.
pub fn parse_with_preset(text: &str, preset: Option<&str>) -> Result<SimConfig> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Parse { path: ".".into(), message: e.to_string() })?;
    resolve(value, preset)
}

/// Reads `path` if given; otherwise expands `preset` alone.
pub fn load_config(path: Option<&Path>, preset: Option<&str>) -> Result<SimConfig> {
    match (path, preset) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_with_preset(&text, preset)
        }
        (None, Some(name)) => SimConfig::preset(name),
        (None, None) => Err(CliError::Invalid("either --config or --preset is required".into())),
    }
}

fn resolve(mut user: Value, preset: Option<&str>) -> Result<SimConfig> {
    let Value::Object(fields) = &mut user else {
        return Err(CliError::Parse { path: ".".into(), message: "expected a JSON object".into() });
    };
    let named = match fields.remove("preset") {
        None => None,
        Some(Value::String(s)) => Some(s),
        Some(_) => return Err(CliError::Parse { path: "preset".into(), message: "expected a string".into() }),
    };
    let mut base = match preset.map(str::to_owned).or(named) {
        Some(name) => preset_document(&name)?,
        None => Value::Object(Map::new()),
    };
    merge(&mut base, user);
    expand_named_parts(&mut base)?;

    let raw: RawConfig = serde_path_to_error::deserialize(base)
        .map_err(|e| CliError::Parse { path: e.path().to_string(), message: e.inner().to_string() })?;
    let cfg = raw.into_config()?;
    cfg.validate()?;
    Ok(cfg)
}

fn unknown_preset(path: &str, name: &str) -> CliError {
    CliError::Parse { path: path.into(), message: format!("unknown preset `{name}` (available: {DUNCAN_TOOR})") }
}

fn preset_mixture(name: &str) -> Option<Value> {
    (name == DUNCAN_TOOR).then(|| {
        json!({
            "species_names": ["H2", "N2", "CO2"],
            "masses_amu": [2.0, 28.0, 44.0],
            "binary_diffusivities_cm2s": [[0.0, 0.833, 0.68], [0.833, 0.0, 0.168], [0.68, 0.168, 0.0]],
            "intra_cross_section_norms": [1.0, 1.0, 1.0],
            "gamma": 0.1,
            "kappa": 5.0 / 3.0,
            "temperature": 1.0,
            "n_ref": 1.0
        })
    })
}

/// Full configuration document of a preset.
pub fn preset_document(name: &str) -> Result<Value> {
    let mixture = preset_mixture(name).ok_or_else(|| unknown_preset("preset", name))?;
    Ok(json!({
        "model": "homs",
        "mixture": mixture,
        "grid": { "x_min": 0.0, "x_max": 1.0, "dx": 0.05 },
        "dt": 2e-4,
        "t_end": 2.0,
        "snapshot_times": DUNCAN_TOOR_SNAPSHOTS,
        "initial_condition": { "preset": DUNCAN_TOOR, "interface_rule": "average" },
        "neglect_self_diffusion": false,
        "initial_deviator": "algebraic",
        "singular_tol": 1e-12,
        "positivity_tol": 1e-12
    }))
}

fn names_ic_source(v: &Value) -> bool {
    v.is_string() || ["preset", "uniform", "segments"].iter().any(|k| v.get(k).is_some())
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                if k == "initial_condition" && names_ic_source(&v) {
                    b.insert(k, v);
                } else {
                    merge(b.entry(k).or_insert(Value::Null), v);
                }
            }
        }
        (b, o) => *b = o,
    }
}

/// Replaces `"mixture": "<preset>"` and `"initial_condition": "<preset>"` by
/// their object forms.
fn expand_named_parts(doc: &mut Value) -> Result<()> {
    let Value::Object(fields) = doc else { return Ok(()) };
    if let Some(Value::String(name)) = fields.get("mixture") {
        let m = preset_mixture(name).ok_or_else(|| unknown_preset("mixture", name))?;
        fields.insert("mixture".into(), m);
    }
    if let Some(Value::String(name)) = fields.get("initial_condition") {
        let ic = json!({ "preset": name });
        fields.insert("initial_condition".into(), ic);
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GammaInput {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

impl GammaInput {
    fn to_matrix(&self, s: usize) -> msdiff::Result<Matrix> {
        match self {
            GammaInput::Scalar(g) => Ok(Matrix::from_fn(s, |_, _| *g)),
            GammaInput::Matrix(rows) => Matrix::from_rows(rows),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureInput {
    species_names: Vec<String>,
    masses_amu: Vec<f64>,
    binary_diffusivities_cm2s: Vec<Vec<f64>>,
    intra_cross_section_norms: Vec<f64>,
    gamma: GammaInput,
    kappa: f64,
    temperature: f64,
    n_ref: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridInput {
    x_min: f64,
    x_max: f64,
    dx: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialConditionInput {
    preset: Option<String>,
    uniform: Option<Vec<f64>>,
    segments: Option<Vec<Vec<Segment>>>,
    #[serde(default)]
    interface_rule: InterfaceRule,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Model,
    mixture: MixtureInput,
    grid: GridInput,
    dt: f64,
    t_end: f64,
    snapshot_times: Vec<f64>,
    initial_condition: InitialConditionInput,
    #[serde(default)]
    gamma_override: Option<GammaInput>,
    #[serde(default)]
    neglect_self_diffusion: bool,
    #[serde(default)]
    initial_deviator: DeviatorInit,
    #[serde(default = "default_tol")]
    singular_tol: f64,
    #[serde(default = "default_tol")]
    positivity_tol: f64,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

fn default_tol() -> f64 {
    1e-12
}

impl RawConfig {
    fn into_config(self) -> Result<SimConfig> {
        let invalid = |e: msdiff::Error| CliError::Invalid(e.to_string());
        let m = self.mixture;
        let s = m.masses_amu.len();
        let mixture = PhysicalMixture {
            species_names: m.species_names,
            masses_amu: m.masses_amu,
            binary_diffusivities_cm2s: Matrix::from_rows(&m.binary_diffusivities_cm2s).map_err(invalid)?,
            intra_cross_section_norms: m.intra_cross_section_norms,
            gamma: m.gamma.to_matrix(s).map_err(invalid)?,
            kappa: m.kappa,
            temperature: m.temperature,
            n_ref: m.n_ref,
        };
        let grid = build_grid(self.grid.x_min, self.grid.x_max, self.grid.dx).map_err(invalid)?;

        let ic = self.initial_condition;
        let source = match (ic.preset, ic.uniform, ic.segments) {
            (Some(name), None, None) if name == DUNCAN_TOOR => {
                if (grid.x_min, grid.x_max) != (0.0, 1.0) {
                    return Err(CliError::Invalid("the duncan-toor initial condition needs the domain [0, 1]".into()));
                }
                InitialCondition::duncan_toor()
            }
            (Some(name), None, None) => return Err(unknown_preset("initial_condition.preset", &name)),
            (None, Some(values), None) => InitialCondition::uniform(&values, grid.x_min, grid.x_max),
            (None, None, Some(species)) => InitialCondition { species, interface_rule: ic.interface_rule },
            _ => {
                return Err(CliError::Invalid(
                    "initial_condition needs exactly one of `preset`, `uniform` or `segments`".into(),
                ))
            }
        };

        Ok(SimConfig {
            model: self.model,
            mixture,
            grid,
            dt: self.dt,
            t_end: self.t_end,
            snapshot_times: self.snapshot_times,
            initial_condition: source.with_interface_rule(ic.interface_rule),
            gamma_override: self.gamma_override.map(|g| g.to_matrix(s)).transpose().map_err(invalid)?,
            neglect_self_diffusion: self.neglect_self_diffusion,
            initial_deviator: self.initial_deviator,
            tol: Tolerances { singular: self.singular_tol, positivity: self.positivity_tol },
            output_dir: self.output_dir,
        })
    }
}
