use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use msdiff_cli::commands::{compare, params_table, run, sweep_csv, sweep_gamma};
use msdiff_cli::output::fmt_float;
use msdiff_cli::{load_config, CliError, SimConfig};

/// Multicomponent diffusion with classical and higher-order Maxwell-Stefan models.
#[derive(Parser)]
#[command(name = "msdiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a built-in configuration (`duncan-toor`).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<(SimConfig, Option<PathBuf>), CliError> {
        let cfg = load_config(self.config.as_deref(), self.preset.as_deref())?;
        let out = self.out.clone().or_else(|| cfg.output_dir.clone());
        Ok((cfg, out))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one model and write nodes.csv, fluxes.csv and summary.json.
    Run {
        #[command(flatten)]
        common: Common,
        /// Abort instead of warning when the CFL number exceeds 0.5.
        #[arg(long)]
        strict_cfl: bool,
    },
    /// Run both models on the same configuration and compare them.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Compare higher-order runs for several γ against the classical model.
    SweepGamma {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3])]
        gammas: Vec<f64>,
        /// Comparison time.
        #[arg(long, default_value_t = 0.0362)]
        at: f64,
        /// Also rerun each γ with the self-diffusion terms switched.
        #[arg(long)]
        toggle_self_diffusion: bool,
    },
    /// Print the dimensionless parameter table.
    Params {
        #[command(flatten)]
        common: Common,
    },
}

const DEFAULT_OUT: &str = "msdiff-out";

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { common, strict_cfl } => {
            let (cfg, out) = common.load()?;
            let out = out.unwrap_or_else(|| DEFAULT_OUT.into());
            let report = run(&cfg, &out, strict_cfl)?;
            println!(
                "{} run finished: {} steps, {} snapshots written to {}",
                report.model.name(),
                report.steps_taken,
                report.snapshots.len(),
                out.display()
            );
        }
        Command::Compare { common } => {
            let (cfg, out) = common.load()?;
            let out = out.unwrap_or_else(|| DEFAULT_OUT.into());
            let report = compare(&cfg, Some(&out))?;
            println!("{:>12} {:>8} {:>14} {:>14} {:>14}", "t", "species", "|n gap|", "ms dist", "homs dist");
            for s in &report.snapshots {
                for (i, d) in s.difference.species.iter().enumerate() {
                    println!(
                        "{:>12} {:>8} {:>14.6e} {:>14.6e} {:>14.6e}",
                        s.time,
                        i + 1,
                        d.n.linf,
                        s.ms_distance[i].linf,
                        s.homs_distance[i].linf
                    );
                }
            }
        }
        Command::SweepGamma { common, gammas, at, toggle_self_diffusion } => {
            let (cfg, out) = common.load()?;
            let report = sweep_gamma(&cfg, &gammas, at, toggle_self_diffusion, out.as_deref())?;
            print!("{}", sweep_csv(&report));
            println!("monotone: {}  (t = {})", report.monotone, fmt_float(report.time));
        }
        Command::Params { common } => {
            let (cfg, out) = common.load()?;
            let table = params_table(&cfg)?;
            print!("{table}");
            if let Some(dir) = out {
                msdiff_cli::output::ensure_dir(&dir)?;
                let path = dir.join("params.txt");
                std::fs::write(&path, &table).map_err(|e| CliError::Io { path, source: e })?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
