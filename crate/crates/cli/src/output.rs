//! CSV and JSON writers. Floats are printed with 17 significant digits so
//! files are bit-stable and round-trip exactly.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use msdiff::diagnostics::{equilibrium_distance, CflReport, Distance, TraceRecord};
use msdiff::homs::total_pressure;
use msdiff::simulate::RunReport;
use msdiff::{MixtureSpec, Model};
use serde::Serialize;

use crate::error::{CliError, Result};

pub const NODES_HEADER: &str = "t,x,species,n,P,p_total";
pub const FLUXES_HEADER: &str = "t,x_half,species,J";
pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Dimensionless parameters as reported in summaries and tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterTable {
    pub species_names: Vec<String>,
    pub masses: Vec<f64>,
    pub diffusivities: Vec<Vec<f64>>,
    pub cross_section_norms: Vec<Vec<f64>>,
    pub self_diffusivities: Vec<f64>,
    pub gamma: Vec<Vec<f64>>,
    pub kappa_t: f64,
    pub neglect_self_diffusion: bool,
}

impl ParameterTable {
    pub fn new(spec: &MixtureSpec) -> Self {
        let s = spec.species_count();
        Self {
            species_names: spec.species_names.clone(),
            masses: spec.masses.clone(),
            diffusivities: spec.diffusivities.rows(),
            cross_section_norms: spec.cross_section_norms.rows(),
            self_diffusivities: (0..s).map(|i| spec.diffusivities[(i, i)]).collect(),
            gamma: spec.gamma.rows(),
            kappa_t: spec.kappa_t(),
            neglect_self_diffusion: spec.neglect_self_diffusion,
        }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    complete: bool,
    error: Option<String>,
    model: Model,
    dt: f64,
    steps_taken: usize,
    cfl: CflReport,
    parameters: ParameterTable,
    asymptote: &'a [f64],
    snapshot_times: Vec<f64>,
    final_equilibrium_distance: Option<Vec<Distance>>,
    trace: &'a [TraceRecord],
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    writeln!(w).map_err(|e| CliError::io(path, e))?;
    finish(w, path)
}

/// Writes `nodes.csv`, `fluxes.csv` and `summary.json` into `dir`. A failed
/// run also gets an `INCOMPLETE` file holding the error.
pub fn write_run(dir: &Path, report: &RunReport, error: Option<&msdiff::Error>) -> Result<()> {
    ensure_dir(dir)?;
    let spec = &report.spec;
    let grid = &report.grid;

    let path = dir.join("nodes.csv");
    let mut w = create(&path)?;
    let io = |e| CliError::io(&path, e);
    writeln!(w, "{NODES_HEADER}").map_err(io)?;
    for snap in &report.snapshots {
        let st = &snap.state;
        let p_total: Vec<Vec<f64>> = (0..st.node_count())
            .map(|l| total_pressure(&st.node_densities(l), &st.node_deviators(l), spec.kappa, spec.temperature))
            .collect();
        let t = fmt_float(snap.time);
        for (i, (ni, pi)) in st.n.iter().zip(&st.p).enumerate() {
            for (l, (n, p)) in ni.iter().zip(pi).enumerate() {
                writeln!(
                    w,
                    "{t},{},{},{},{},{}",
                    fmt_float(grid.node(l)),
                    i + 1,
                    fmt_float(*n),
                    fmt_float(*p),
                    fmt_float(p_total[l][i])
                )
                .map_err(io)?;
            }
        }
    }
    finish(w, &path)?;

    let path = dir.join("fluxes.csv");
    let mut w = create(&path)?;
    let io = |e| CliError::io(&path, e);
    writeln!(w, "{FLUXES_HEADER}").map_err(io)?;
    for snap in &report.snapshots {
        let t = fmt_float(snap.time);
        for (i, ji) in snap.state.j.iter().enumerate() {
            for (l, v) in ji.iter().enumerate() {
                writeln!(w, "{t},{},{},{}", fmt_float(grid.half_node(l)), i + 1, fmt_float(*v)).map_err(io)?;
            }
        }
    }
    finish(w, &path)?;

    let summary = Summary {
        complete: report.complete && error.is_none(),
        error: error.map(|e| e.to_string()),
        model: report.model,
        dt: report.dt,
        steps_taken: report.steps_taken,
        cfl: report.cfl,
        parameters: ParameterTable::new(spec),
        asymptote: &report.asymptote,
        snapshot_times: report.snapshots.iter().map(|s| s.time).collect(),
        final_equilibrium_distance: report
            .snapshots
            .last()
            .map(|s| equilibrium_distance(&s.state, &report.asymptote, grid)),
        trace: &report.trace,
    };
    write_json(&dir.join("summary.json"), &summary)?;

    let marker = dir.join(INCOMPLETE_MARKER);
    match error {
        Some(e) => fs::write(&marker, format!("{e}\n")).map_err(|err| CliError::io(&marker, err)),
        None if marker.exists() => fs::remove_file(&marker).map_err(|err| CliError::io(&marker, err)),
        None => Ok(()),
    }
}
