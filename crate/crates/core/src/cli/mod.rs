//! Command-line front end: config loading, dispatch and exit codes.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use config::ExperimentConfig;
use output::{config_hash, OutputDir};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "infswap", version, about = "Large-deviation diagnostics for infinite swapping")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML experiment config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Config override, e.g. `--set simulate.horizon=500`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Simulate the swapping processes and record empirical measures.
    Simulate,
    /// Constrained rates over the asymmetry sweep.
    Tables,
    /// Value function and control tilts of the single-temperature problem.
    ValueFunction,
    /// Rate and distance to the product measure for prescribed associations.
    Diagnose,
    /// Evaluate a rate function at a measure.
    Rate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Tables => "tables",
            Command::ValueFunction => "value-function",
            Command::Diagnose => "diagnose",
            Command::Rate => "rate",
        }
    }
}

/// Exit code for a library error: 2 for bad input, 3 for numerical failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidGrid(_)
        | Error::InvalidParameter { .. }
        | Error::DimensionMismatch { .. }
        | Error::NotProbability(_)
        | Error::TemperatureCount { .. }
        | Error::ProductTooLarge { .. }
        | Error::Infeasible { .. }
        | Error::TargetOutOfRange { .. }
        | Error::Config(_) => EXIT_CONFIG,
        Error::NotReversible { .. }
        | Error::AbsorbingState(_)
        | Error::BracketFailure(_)
        | Error::NonMonotone(_)
        | Error::Solver(_) => EXIT_SOLVER,
        Error::Io(_) | Error::Json(_) => EXIT_IO,
    }
}

pub fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    ExperimentConfig::from_toml(&text, &overrides)
}

pub fn run(cli: &Cli) -> Result<()> {
    let started = Instant::now();
    let cfg = load_config(cli)?;
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::Config("--jobs must be positive".into()));
        }
        // a pool already exists when called twice in one process; keep it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let canonical = cfg.canonical_json();
    let mut out = OutputDir::create(&cli.out, config_hash(&canonical))?;
    let summary = match cli.command {
        Command::Simulate => commands::simulate(&cfg, &mut out)?,
        Command::Tables => commands::tables(&cfg, &mut out)?,
        Command::ValueFunction => commands::value_function(&cfg, &mut out)?,
        Command::Diagnose => commands::diagnose(&cfg, &mut out)?,
        Command::Rate => commands::rate(&cfg, &mut out)?,
    };
    let config_value: serde_json::Value = serde_json::from_str(&canonical)?;
    let manifest = out.finish(cli.command.name(), config_value, summary, started.elapsed())?;
    println!("manifest: {}", manifest.display());
    Ok(())
}

/// Parse arguments, run, and map the outcome to a process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
