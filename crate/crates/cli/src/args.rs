//! Command-line grammar. Every value is optional here so that a config file
//! can fill in what the command line leaves out.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "decay-focus", version = crate::VERSION, about = "Bandit change detection experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,

    /// TOML or key=value file supplying defaults for any flag
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Write results here (atomically) instead of standard output
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads for Monte Carlo trials [default: all cores]
    #[arg(long, global = true, env = "DECAY_FOCUS_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Expected detection delay for one configuration
    Edd(EddArgs),
    /// Average run length to false alarm for one configuration
    Arl(ArlArgs),
    /// Expected detection delay over an (M, mu1) grid
    Sweep(SweepArgs),
    /// Compute C and the threshold for a target ARL
    Calibrate(CalibrateArgs),
    /// Check the detectors against their brute-force oracles
    Verify(VerifyArgs),
}

#[derive(Debug, Default, Args)]
pub struct LevelArgs {
    /// Detection threshold lambda
    #[arg(long, conflicts_with = "gamma", allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    /// Target ARL; the threshold is calibrated from it
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Number of trials
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tick at which undetected runs are censored
    #[arg(long)]
    pub horizon: Option<u64>,
}

#[derive(Debug, Default, Args)]
pub struct EddArgs {
    /// Number of streams M
    #[arg(long)]
    pub streams: Option<usize>,
    /// Post-change mean
    #[arg(long, allow_negative_numbers = true)]
    pub mu1: Option<f64>,
    /// Change point
    #[arg(long)]
    pub nu: Option<u64>,
    #[command(flatten)]
    pub level: LevelArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Default, Args)]
pub struct ArlArgs {
    /// Number of streams M
    #[arg(long)]
    pub streams: Option<usize>,
    #[command(flatten)]
    pub level: LevelArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Default, Args)]
pub struct SweepArgs {
    /// Comma-separated post-change means
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mu1_grid: Option<Vec<f64>>,
    /// Comma-separated stream counts
    #[arg(long, value_delimiter = ',')]
    pub m_grid: Option<Vec<usize>>,
    /// Change point
    #[arg(long)]
    pub nu: Option<u64>,
    /// Detection threshold lambda
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Default, Args)]
pub struct CalibrateArgs {
    /// Target ARL
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Number of streams M
    #[arg(long)]
    pub streams: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct VerifyArgs {
    /// Random sequences per suite
    #[arg(long)]
    pub cases: Option<usize>,
    /// Maximum sequence length
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}
