//! Command-line front end: parameter parsing, subcommands and dataset
//! serialization for the `pulsed-squeeze` binary.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;

use std::io::Write;

use clap::{Parser, Subcommand};

pub use commands::{execute, CommandKind, Report};
pub use config::{Flags, RunConfig};
pub use dataset::{fmt_f64, Column, Dataset, Format};
pub use error::{exit, CliError};

/// Env var capping the worker-thread count.
pub const THREADS_ENV: &str = "PULSED_SQUEEZE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "pulsed-squeeze",
    version,
    about = "Photon number and quadrature squeezing of a pulsed-pump OPO"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean photon number over the time window.
    #[command(allow_negative_numbers = true)]
    Photon(Flags),
    /// Quadrature variance for both source conventions.
    #[command(allow_negative_numbers = true)]
    Variance(Flags),
    /// Per-period variance minima over (f̄/f_th, f1/f̄).
    #[command(allow_negative_numbers = true)]
    Minima(Flags),
    /// Variance minimum versus modulation frequency.
    #[command(name = "scan-delta", allow_negative_numbers = true)]
    ScanDelta(Flags),
    /// Integral formulas against the ODE oracle over one period.
    #[command(allow_negative_numbers = true)]
    Check(Flags),
}

impl Command {
    pub fn split(&self) -> (CommandKind, &Flags) {
        match self {
            Command::Photon(f) => (CommandKind::Photon, f),
            Command::Variance(f) => (CommandKind::Variance, f),
            Command::Minima(f) => (CommandKind::Minima, f),
            Command::ScanDelta(f) => (CommandKind::ScanDelta, f),
            Command::Check(f) => (CommandKind::Check, f),
        }
    }
}

/// Resolves the config, runs the command and writes the rendered dataset.
/// Returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (kind, flags) = cli.command.split();
    let config = RunConfig::from_flags(flags)?;
    let report = execute(kind, &config)?;
    let text = report.dataset.render(config.format);
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(match report.failure {
        Some(e) => {
            log::error!("{e}");
            e.exit_code()
        }
        None => 0,
    })
}

/// Sizes the global rayon pool from [`THREADS_ENV`].
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Config(format!("{THREADS_ENV}: '{value}' is not a positive count"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("{THREADS_ENV}: {e}")))
}
