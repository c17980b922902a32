//! Command-line driver: configuration, runs and tabular output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod report;
pub mod runs;
pub mod table;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use runs::{Check, RunOutcome};

#[derive(Debug, Parser)]
#[command(
    name = "ballistic",
    version,
    about = "Gaussian packet spreading as ballistic diffusion"
)]
pub struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory; overrides `[output] directory`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads for sweeps (0 picks one per core).
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    pub workers: usize,

    /// Suppress the per-check report on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Single packet width against the closed form.
    Spread,
    /// Two-beam interference pattern and fringe positions.
    Doubleslit,
    /// Flux lines through the simulated density.
    Trajectories,
    /// Error ratios under grid refinement.
    Convergence {
        /// Number of refinement levels beyond the base grid.
        #[arg(long, default_value_t = runs::convergence::DEFAULT_REFINEMENTS)]
        refinements: usize,
    },
    /// Repeat a run over the `[sweep]` parameter lists.
    Sweep,
}

/// Loads the configuration and executes the selected run.
pub fn execute(cli: &Cli) -> Result<RunOutcome> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config <PATH> is required".into()))?;
    let cfg = RunConfig::load(path)?;
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| cfg.output.directory.clone());
    match &cli.command {
        Command::Spread => runs::spread::run(&cfg, &out),
        Command::Doubleslit => runs::doubleslit::run(&cfg, &out),
        Command::Trajectories => runs::trajectories::run(&cfg, &out),
        Command::Convergence { refinements } => runs::convergence::run(&cfg, &out, *refinements),
        Command::Sweep => runs::sweep::run(&cfg, &out, cli.workers),
    }
}
