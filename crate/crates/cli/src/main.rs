//! `rsmooth` — experiment harness for randomized-smoothing estimators.
//!
//! Subcommands: `estimate` (one Monte-Carlo estimate), `sweep` (grid over
//! epsilon, samples, or x), `optimize` (gradient descent), `validate`
//! (oracle cross-checks). Output is CSV; see the README for schemas.
//!
//! Exit codes: 0 success, 1 runtime/numeric or validation failure,
//! 2 usage/spec error.

mod commands;
mod csvout;
mod spec;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "rsmooth", version, about = "Randomized-smoothing experiment harness")]
pub struct Cli {
    /// Base RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write CSV output to this file (also printed to stdout).
    #[arg(long, global = true)]
    pub output: Option<String>,
    /// JSON config file; keys mirror flag names, flags override.
    #[arg(long, global = true)]
    pub config: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One Monte-Carlo estimate of the smoothed value or gradient.
    Estimate(EstimateArgs),
    /// Grid sweep over exactly one axis (epsilon, samples, or x).
    Sweep(SweepArgs),
    /// Fixed-step gradient descent with a chosen gradient source.
    Optimize(OptimizeArgs),
    /// Oracle cross-checks: closed form vs quadrature vs finite differences.
    Validate(ValidateArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct EstimateArgs {
    /// Problem descriptor, e.g. `heaviside` or `edge:N=32,target=0.8`.
    #[arg(long)]
    pub problem: Option<String>,
    /// Query point, comma-separated, e.g. `0` or `1,1`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// One of: value, zeroth, zeroth_baseline, first.
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub samples: Option<u64>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct SweepArgs {
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// Swept axis: epsilon, samples, or x.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Explicit grid for the swept axis, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Seeds to run per grid point, comma-separated; defaults to `--seed`.
    #[arg(long)]
    pub seeds: Option<String>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub problem: Option<String>,
    /// Starting point, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Gradient source: raw, zeroth, zeroth_baseline, or first.
    #[arg(long)]
    pub grad_source: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub stop_tol: Option<f64>,
    /// Reuse the same noise every iteration instead of reseeding.
    #[arg(long)]
    pub no_reseed: bool,
}

#[derive(Debug, Args, Default, Clone)]
pub struct ValidateArgs {
    /// Quadrature node budget (odd).
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub half_width: Option<f64>,
}

/// Failures mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags/config/preconditions: exit 2.
    Usage(String),
    /// Runtime numeric error or validation-suite failure: exit 1.
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
