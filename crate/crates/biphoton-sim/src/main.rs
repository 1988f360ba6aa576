//! Command-line front end for the biphoton source simulator.
//!
//! Four subcommands cover the bench workflow: `state` prints the emitted
//! state and its click probabilities, `scan` runs a Monte Carlo analyzer
//! sweep, `lock` exercises the phase lock, and `metrics` reduces rates to
//! visibility, error rate, and brightness figures. All of them read one
//! TOML config; every key has a calibrated default, so an empty file is a
//! valid config. Exit codes: 0 success, 1 usage or config problem, 2
//! runtime failure (simulation or I/O).

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

/// Error carrying the process exit code: config/usage problems exit 1,
/// runtime (simulation or I/O) failures exit 2.
#[derive(Debug)]
pub enum AppError {
    Config(String),
    Runtime(String),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 1,
            AppError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Config(msg) | AppError::Runtime(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for AppError {}

#[derive(Parser)]
#[command(
    name = "biphoton-sim",
    version,
    about = "Simulator of a bidirectionally pumped photon-pair source with a four-port analyzer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the emitted state and its joint click probabilities
    State(CommonArgs),
    /// Monte Carlo coincidence scan over analyzer angles (writes scan.csv)
    Scan(CommonArgs),
    /// Run the phase lock and write its trace (lock_trace.csv)
    Lock(CommonArgs),
    /// Report visibility, error rate, conditional probabilities, brightness
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides [output].dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master RNG seed (overrides [run].seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Also write SVG plots next to the CSV output
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct MetricsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Compute metrics from a scan.csv instead of the analytic model
    #[arg(long)]
    counts: Option<PathBuf>,
}

fn load(common: &CommonArgs) -> Result<config::RunConfig, AppError> {
    let mut cfg = config::parse_config(&common.config)?;
    if let Some(out) = &common.out {
        cfg.output.dir = out.display().to_string();
    }
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    cfg.output.emit_svg |= common.svg;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), AppError> {
    match &cli.command {
        Command::State(common) => commands::cmd_state(&load(common)?),
        Command::Scan(common) => commands::cmd_scan(&load(common)?),
        Command::Lock(common) => commands::cmd_lock(&load(common)?),
        Command::Metrics(args) => {
            commands::cmd_metrics(&load(&args.common)?, args.counts.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
