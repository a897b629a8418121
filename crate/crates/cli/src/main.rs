//! `costab` — stability analysis of coalition partitions in atomic
//! congestion games.
//!
//! Exit codes: 0 clean, 2 when the instance is degenerate (non-unique
//! grand-coalition optimizer or a partition without a pure NE), 1 on error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use costab_core::report::{
    figure_csv, load_instance, run_analysis, run_sweep, BetaGrid, BetaSpec, InstanceConfig,
    StabilityReport,
};

#[derive(Parser)]
#[command(name = "costab", version, about = "Coalition stability in atomic congestion games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Instance file (TOML)
    instance: PathBuf,
    /// Override the comparison tolerance
    #[arg(long)]
    epsilon: Option<f64>,
    /// Write the output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one instance and emit the full JSON stability report
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Evaluate stability pointwise on a grid, as `start:stop:step`
        #[arg(long, value_parser = parse_grid)]
        beta_grid: Option<BetaGrid>,
    },
    /// Run the mu1 sweep of an instance and emit figure data as CSV
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print regime predicates and closed-form verdicts only
    Check {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Build the blocking graph at one cost and list its cycles
    Cycles {
        #[command(flatten)]
        common: CommonArgs,
        /// Communication cost at which blocking is evaluated
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
    },
}

fn parse_grid(text: &str) -> Result<BetaGrid, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err("expected start:stop:step".into());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse().map_err(|e| format!("{e}")))
        .collect::<Result<_, String>>()?;
    Ok(BetaGrid { start: nums[0], stop: nums[1], step: nums[2] })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(degenerate) => {
            if degenerate {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load(common: &CommonArgs) -> Result<InstanceConfig> {
    let loaded = load_instance(&common.instance)
        .with_context(|| format!("loading {}", common.instance.display()))?;
    for warning in &loaded.warnings {
        eprintln!("warning: {warning}");
    }
    let mut config = loaded.config;
    if let Some(eps) = common.epsilon {
        if !(eps > 0.0 && eps.is_finite()) {
            bail!("--epsilon must be positive and finite");
        }
        config.epsilon = eps;
    }
    Ok(config)
}

fn emit(common: &CommonArgs, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn warn_all(report: &StabilityReport) {
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Analyze { common, beta_grid } => {
            let mut config = load(&common)?;
            if let Some(grid) = beta_grid {
                config.beta = BetaSpec::Grid(grid);
            }
            let report = run_analysis(&config)?;
            warn_all(&report);
            emit(&common, &report.to_json())?;
            Ok(report.degenerate)
        }
        Command::Sweep { common } => {
            let config = load(&common)?;
            let outcome = run_sweep(&config)?;
            for report in &outcome.reports {
                warn_all(report);
            }
            emit(&common, &figure_csv(&outcome)?)?;
            Ok(outcome.reports.iter().any(|r| r.degenerate))
        }
        Command::Check { common } => {
            let mut config = load(&common)?;
            config.checks.theory = true;
            config.checks.cycles = false;
            let report = run_analysis(&config)?;
            warn_all(&report);
            let summary = serde_json::json!({
                "schema_version": report.schema_version,
                "regime": report.regime,
                "theory": report.theory,
                "degenerate": report.degenerate,
            });
            emit(&common, &serde_json::to_string_pretty(&summary)?)?;
            Ok(report.degenerate)
        }
        Command::Cycles { common, beta } => {
            if !(beta >= 0.0 && beta.is_finite()) {
                bail!("--beta must be finite and nonnegative");
            }
            let mut config = load(&common)?;
            config.checks.theory = false;
            config.checks.cycles = true;
            config.checks.cycle_betas = vec![beta];
            let report = run_analysis(&config)?;
            warn_all(&report);
            let cycles = serde_json::json!({
                "schema_version": report.schema_version,
                "cycles": report.cycles,
                "degenerate": report.degenerate,
            });
            emit(&common, &serde_json::to_string_pretty(&cycles)?)?;
            Ok(report.degenerate)
        }
    }
}
