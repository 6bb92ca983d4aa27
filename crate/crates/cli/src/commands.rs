use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use msdiff::diagnostics::{cfl_number, compare_runs, equilibrium_distance, Distance, RunComparison};
use msdiff::homs::total_pressure;
use msdiff::simulate::{simulate, RunFailure, RunReport};
use msdiff::Model;
use serde::Serialize;

use crate::config::SimConfig;
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, fmt_float, write_json, write_run, ParameterTable};

/// Runs `cfg` without touching the filesystem.
pub fn execute(cfg: &SimConfig) -> Result<std::result::Result<RunReport, RunFailure>> {
    let setup = cfg.run_setup()?;
    let initial = cfg.initial_state(&setup.spec)?;
    Ok(simulate(&setup, initial))
}

fn check_cfl(cfg: &SimConfig, strict: bool) -> Result<()> {
    let cfl = cfl_number(&cfg.spec()?, cfg.dt, cfg.grid.dx);
    if cfl.flagged {
        if strict {
            return Err(CliError::StrictCfl { number: cfl.number, limit: cfl.limit });
        }
        eprintln!("warning: CFL number {:.6} is above the explicit stability limit {}", cfl.number, cfl.limit);
    }
    Ok(())
}

fn run_into(cfg: &SimConfig, dir: &Path) -> Result<RunReport> {
    match execute(cfg)? {
        Ok(report) => {
            write_run(dir, &report, None)?;
            Ok(report)
        }
        Err(failure) => {
            write_run(dir, &failure.partial, Some(&failure.error))?;
            Err(failure.error.into())
        }
    }
}

/// Single run written to `out`. Over-limit CFL numbers warn unless `strict_cfl`.
pub fn run(cfg: &SimConfig, out: &Path, strict_cfl: bool) -> Result<RunReport> {
    check_cfl(cfg, strict_cfl)?;
    run_into(cfg, out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotComparison {
    pub time: f64,
    pub difference: RunComparison,
    pub ms_distance: Vec<Distance>,
    pub homs_distance: Vec<Distance>,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub ms: RunReport,
    pub homs: RunReport,
    pub snapshots: Vec<SnapshotComparison>,
}

fn comparison_table(ms: &RunReport, homs: &RunReport) -> Result<Vec<SnapshotComparison>> {
    ms.snapshots
        .iter()
        .zip(&homs.snapshots)
        .map(|(a, b)| {
            Ok(SnapshotComparison {
                time: a.time,
                difference: compare_runs(ms, homs, a.time)?,
                ms_distance: equilibrium_distance(&a.state, &ms.asymptote, &ms.grid),
                homs_distance: equilibrium_distance(&b.state, &homs.asymptote, &homs.grid),
            })
        })
        .collect()
}

fn write_side_by_side(path: &Path, ms: &RunReport, homs: &RunReport) -> Result<()> {
    let mut text = String::from("t,x,species,n_ms,n_homs,P_homs,p_total_ms,p_total_homs\n");
    let spec = &homs.spec;
    for (a, b) in ms.snapshots.iter().zip(&homs.snapshots) {
        let (sa, sb) = (&a.state, &b.state);
        for l in 0..sa.node_count() {
            let pa = total_pressure(&sa.node_densities(l), &sa.node_deviators(l), spec.kappa, spec.temperature);
            let pb = total_pressure(&sb.node_densities(l), &sb.node_deviators(l), spec.kappa, spec.temperature);
            for i in 0..sa.species_count() {
                writeln!(
                    text,
                    "{},{},{},{},{},{},{},{}",
                    fmt_float(a.time),
                    fmt_float(ms.grid.node(l)),
                    i + 1,
                    fmt_float(sa.n[i][l]),
                    fmt_float(sb.n[i][l]),
                    fmt_float(sb.p[i][l]),
                    fmt_float(pa[i]),
                    fmt_float(pb[i])
                )
                .expect("writing to a String");
            }
        }
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Runs both models on the same configuration. With `out`, each run goes to
/// `ms/` and `homs/`, plus `compare.csv` and `comparison.json`.
pub fn compare(cfg: &SimConfig, out: Option<&Path>) -> Result<CompareReport> {
    check_cfl(cfg, false)?;
    let mut reports = Vec::with_capacity(2);
    for model in [Model::Ms, Model::Homs] {
        let c = cfg.with_model(model);
        let report = match out {
            Some(dir) => run_into(&c, &dir.join(model.name()))?,
            None => execute(&c)?.map_err(|f| f.error)?,
        };
        reports.push(report);
    }
    let homs = reports.pop().expect("two runs");
    let ms = reports.pop().expect("two runs");
    let snapshots = comparison_table(&ms, &homs)?;
    if let Some(dir) = out {
        write_side_by_side(&dir.join("compare.csv"), &ms, &homs)?;
        write_json(&dir.join("comparison.json"), &snapshots)?;
    }
    Ok(CompareReport { ms, homs, snapshots })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    /// Largest L∞ density gap to the classical run over species at the sweep time.
    pub gap: f64,
    pub species_gaps: Vec<f64>,
    /// L∞ over space, snapshots and fields between runs with and without
    /// self-diffusion.
    pub self_diffusion_gap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub time: f64,
    pub rows: Vec<SweepRow>,
    /// Gaps strictly decrease with increasing γ.
    pub monotone: bool,
}

fn max_gap_over_snapshots(a: &RunReport, b: &RunReport) -> Result<f64> {
    a.snapshots.iter().try_fold(0.0_f64, |m, s| Ok(m.max(compare_runs(a, b, s.time)?.max_gap())))
}

/// One higher-order run per γ against one classical baseline, compared at `at`.
pub fn sweep_gamma(
    cfg: &SimConfig,
    gammas: &[f64],
    at: f64,
    toggle_self_diffusion: bool,
    out: Option<&Path>,
) -> Result<SweepReport> {
    if gammas.is_empty() {
        return Err(CliError::Invalid("no γ values to sweep".into()));
    }
    let solve = |c: &SimConfig| -> Result<RunReport> { Ok(execute(c)?.map_err(|f| f.error)?) };
    let mut gammas = gammas.to_vec();
    gammas.sort_by(f64::total_cmp);

    let baseline = solve(&cfg.with_model(Model::Ms))?;
    let mut rows = Vec::with_capacity(gammas.len());
    for &gamma in &gammas {
        let c = cfg.with_model(Model::Homs).with_uniform_gamma(gamma);
        let homs = solve(&c)?;
        let cmp = compare_runs(&baseline, &homs, at)?;
        let self_diffusion_gap = if toggle_self_diffusion {
            let flipped = SimConfig { neglect_self_diffusion: !c.neglect_self_diffusion, ..c.clone() };
            Some(max_gap_over_snapshots(&homs, &solve(&flipped)?)?)
        } else {
            None
        };
        rows.push(SweepRow {
            gamma,
            gap: cmp.max_density_gap(),
            species_gaps: cmp.species.iter().map(|d| d.n.linf).collect(),
            self_diffusion_gap,
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].gap < w[0].gap);
    let time = baseline.snapshot_at(at).map_or(at, |s| s.time);
    let report = SweepReport { time, rows, monotone };

    if let Some(dir) = out {
        ensure_dir(dir)?;
        let path = dir.join("sweep.csv");
        fs::write(&path, sweep_csv(&report)).map_err(|e| CliError::io(&path, e))?;
        write_json(&dir.join("sweep.json"), &report)?;
    }
    Ok(report)
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let species = report.rows.first().map_or(0, |r| r.species_gaps.len());
    let mut text = String::from("gamma,t,gap");
    for i in 1..=species {
        write!(text, ",gap_species_{i}").unwrap();
    }
    text.push_str(",self_diffusion_gap\n");
    for r in &report.rows {
        write!(text, "{},{},{}", fmt_float(r.gamma), fmt_float(report.time), fmt_float(r.gap)).unwrap();
        for g in &r.species_gaps {
            write!(text, ",{}", fmt_float(*g)).unwrap();
        }
        let sd = r.self_diffusion_gap.map(fmt_float).unwrap_or_default();
        writeln!(text, ",{sd}").unwrap();
    }
    text
}

/// Rounds to `digits` significant figures, in plain notation where sensible.
pub fn sig_figs(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // Rounding can carry into a new leading digit, e.g. 9.999995 → 10.00000.
        let carried = s.trim_start_matches('-').split('.').next().map_or(0, str::len) > (exp + 1).max(1) as usize;
        if carried && decimals > 0 {
            let decimals = decimals - 1;
            return format!("{x:.decimals$}");
        }
        s
    } else {
        format!("{x:.prec$e}", prec = digits - 1)
    }
}

/// Dimensionless parameter table at 6 significant figures.
pub fn params_table(cfg: &SimConfig) -> Result<String> {
    let spec = cfg.spec()?;
    let table = ParameterTable::new(&spec);
    let s = spec.species_count();
    let f = |x: f64| sig_figs(x, 6);
    let mut out = String::new();
    let row = |out: &mut String, label: &str, values: Vec<String>| {
        write!(out, "{label:<26}").unwrap();
        for v in values {
            write!(out, "{v:>14}").unwrap();
        }
        out.push('\n');
    };
    row(&mut out, "species", table.species_names.clone());
    row(&mut out, "mass m_i", table.masses.iter().map(|&v| f(v)).collect());
    row(&mut out, "self-diffusivity D_ii", table.self_diffusivities.iter().map(|&v| f(v)).collect());
    row(&mut out, "self cross-section |b_ii|", (0..s).map(|i| f(table.cross_section_norms[i][i])).collect());
    out.push('\n');
    writeln!(out, "{:<12}{:>14}{:>14}{:>14}", "pair", "D_ij", "|b_ij|", "gamma_ij").unwrap();
    for i in 0..s {
        for j in i + 1..s {
            writeln!(
                out,
                "{:<12}{:>14}{:>14}{:>14}",
                format!("{}-{}", i + 1, j + 1),
                f(table.diffusivities[i][j]),
                f(table.cross_section_norms[i][j]),
                f(table.gamma[i][j])
            )
            .unwrap();
        }
    }
    out.push('\n');
    writeln!(out, "{:<26}{:>14}", "kappa*T", f(table.kappa_t)).unwrap();
    writeln!(out, "{:<26}{:>14}", "mass scale [amu]", f(spec.mass_scale)).unwrap();
    writeln!(out, "{:<26}{:>14}", "diffusivity scale [cm2/s]", f(spec.diffusivity_scale)).unwrap();
    if spec.neglect_self_diffusion {
        writeln!(out, "self-diffusion terms are neglected").unwrap();
    }
    let cfl = cfl_number(&spec, cfg.dt, cfg.grid.dx);
    let flag = if cfl.flagged { "above limit" } else { "within limit" };
    writeln!(out, "{:<26}{:>14}  ({flag} {})", "CFL number", f(cfl.number), cfl.limit).unwrap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_figures() {
        assert_eq!(sig_figs(0.081081081, 6), "0.0810811");
        assert_eq!(sig_figs(6.543037, 6), "6.54304");
        assert_eq!(sig_figs(0.29982150, 6), "0.299822");
        assert_eq!(sig_figs(1.0, 6), "1.00000");
        assert_eq!(sig_figs(9.9999996, 6), "10.0000");
        assert_eq!(sig_figs(123456789.0, 6), "1.23457e8");
        assert_eq!(sig_figs(0.0, 6), "0");
    }
}
