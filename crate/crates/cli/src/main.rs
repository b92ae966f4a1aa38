//! `amt`: experiment runner for adjusted mean-threshold mechanisms.
//!
//! Every subcommand reads one JSON experiment config and writes two files
//! into the output directory: `results.csv` (UTF-8, header row, decimal
//! point, 17-significant-digit floats) and `manifest.json` (resolved config,
//! its SHA-256, per-row provenance, strict verdicts, wall clock). Identical
//! config and seed reproduce identical numeric output at any worker count.
//!
//! Exit codes: 0 success, 1 run failure, 2 bad usage or config, 3 threshold
//! breach under `--strict`.

mod config;
mod run;
mod table;

use clap::{Args, Parser, Subcommand};
use config::{ConfigError, ExperimentConfig, Kind, ResolvedConfig};
use run::{run_kind, run_moments, run_rates, RunError, RunOutput};
use std::path::{Path, PathBuf};
use std::time::Instant;
use table::Manifest;

#[derive(Parser)]
#[command(
    name = "amt",
    version,
    about = "Simulation and verification toolkit for mean-threshold public-good mechanisms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quadrature moment table for the configured distribution and statistic
    Moments(CommonArgs),
    /// Run a simulation experiment (welfare-convergence, budget-growth,
    /// revenue-ceiling, impossibility)
    Simulate(CommonArgs),
    /// Growth-rate diagnostics for the configured schedules
    Rates(CommonArgs),
    /// Estimate worst-case misreport gains and interim participation
    Incentives(CommonArgs),
    /// Ex post tail frequencies against their exponential bounds
    Expost(CommonArgs),
    /// Compare the statistic's profit against the virtual-valuation rule
    Profit(CommonArgs),
    /// Run whatever experiment kind the config declares
    Report(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration file (JSON)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the seed recorded in the config
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads for the estimators (default: one per core)
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Turn threshold breaches into a nonzero exit code
    #[arg(long)]
    strict: bool,
    /// Directory for results.csv and manifest.json (default: config's `out`
    /// field, else the current directory)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum AppError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Run(#[from] RunError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(code) => code,
        Err(AppError::Config(e)) => {
            eprintln!("config error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}

fn execute(cli: Cli) -> Result<i32, AppError> {
    let (mode, args) = match &cli.command {
        Command::Moments(a) => ("moments", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Rates(a) => ("rates", a),
        Command::Incentives(a) => ("incentives", a),
        Command::Expost(a) => ("expost", a),
        Command::Profit(a) => ("profit", a),
        Command::Report(a) => ("report", a),
    };

    let raw = ExperimentConfig::load(&args.config)?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| raw.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let config_dir = args.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let resolved = raw.resolve(&config_dir, args.seed)?;
    check_mode(mode, &resolved)?;

    let started = Instant::now();
    let output: RunOutput = match mode {
        "moments" => run_moments(&resolved)?,
        "rates" => run_rates(&resolved)?,
        _ => run_kind(&resolved, args.workers)?,
    };
    let wall = started.elapsed().as_secs_f64();

    let csv = output.table.to_csv();
    let resolved_json = resolved.canonical_json();
    let manifest = Manifest::build(
        mode,
        &resolved_json,
        resolved.seed,
        args.workers,
        args.strict,
        &output.table,
        output.violations.clone(),
        output.notes,
        &csv,
        wall,
    );

    std::fs::create_dir_all(&out_dir).map_err(|e| AppError::Io {
        path: out_dir.display().to_string(),
        source: e,
    })?;
    let csv_path = out_dir.join("results.csv");
    std::fs::write(&csv_path, &csv).map_err(|e| AppError::Io {
        path: csv_path.display().to_string(),
        source: e,
    })?;
    let manifest_path = out_dir.join("manifest.json");
    let mut manifest_text = manifest.to_json_pretty();
    manifest_text.push('\n');
    std::fs::write(&manifest_path, manifest_text).map_err(|e| AppError::Io {
        path: manifest_path.display().to_string(),
        source: e,
    })?;

    println!(
        "{}: {} rows -> {} ({} replications, {} failures)",
        mode,
        output.table.rows.len(),
        csv_path.display(),
        output.table.total_replications(),
        output.table.total_failures(),
    );
    for v in &output.violations {
        eprintln!("threshold breach: {v}");
    }
    if args.strict && !output.violations.is_empty() {
        return Ok(3);
    }
    Ok(0)
}

/// Subcommands other than `report`, `moments`, and `rates` insist that the
/// config's kind matches, so a run never silently does the wrong study.
fn check_mode(mode: &str, cfg: &ResolvedConfig) -> Result<(), ConfigError> {
    let ok = match mode {
        "simulate" => matches!(
            cfg.kind,
            Kind::WelfareConvergence | Kind::BudgetGrowth | Kind::RevenueCeiling | Kind::Impossibility
        ),
        "incentives" => cfg.kind == Kind::Incentives,
        "expost" => cfg.kind == Kind::ExPost,
        "profit" => cfg.kind == Kind::Profit,
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(ConfigError(format!(
            "subcommand {mode} cannot run a {} config; use `report` or fix the kind",
            cfg.kind
        )))
    }
}
