//! A fully validated experiment, built from flags layered over a config file.

use std::path::PathBuf;

use serde::Serialize;

use crate::args::{Cli, CommandArgs, Format, LevelArgs, RunArgs};
use crate::config::FileConfig;
use crate::CliError;

pub const DEFAULT_STREAMS: usize = 10;
pub const DEFAULT_MU1: f64 = 1.0;
pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_CASES: usize = 1000;
pub const DEFAULT_MAX_LEN: usize = 300;
/// Ticks after the change point before an EDD run is censored.
pub const DEFAULT_EDD_WINDOW: u64 = 2_000_000;
/// ARL horizon defaults to this multiple of `e^λ`, clamped below.
pub const ARL_HORIZON_FACTOR: f64 = 20.0;
pub const ARL_HORIZON_RANGE: (u64, u64) = (10_000, 1_000_000_000);

/// How the detection threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Threshold(f64),
    /// Target ARL; λ = log(C·M·γ).
    Gamma(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Task {
    Edd {
        streams: usize,
        nu: u64,
        mu1: f64,
        level: Level,
        horizon: u64,
        trials: usize,
        seed: u64,
    },
    Arl {
        streams: usize,
        level: Level,
        /// `None` picks a horizon from the threshold at run time.
        horizon: Option<u64>,
        trials: usize,
        seed: u64,
    },
    Sweep {
        mu1_grid: Vec<f64>,
        m_grid: Vec<usize>,
        nu: u64,
        threshold: f64,
        horizon: u64,
        trials: usize,
        seed: u64,
    },
    Calibrate {
        gamma: f64,
        streams: usize,
    },
    Verify {
        cases: usize,
        max_len: usize,
        seed: u64,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Edd { .. } => "edd",
            Task::Arl { .. } => "arl",
            Task::Sweep { .. } => "sweep",
            Task::Calibrate { .. } => "calibrate",
            Task::Verify { .. } => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Everything that determines the results.
    pub task: Task,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Pool size; results do not depend on it.
    pub workers: Option<usize>,
}

impl ExperimentSpec {
    /// Loads `--config` if given, overlays the flags and validates.
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::resolve(cli, file)
    }

    pub fn resolve(cli: Cli, mut file: FileConfig) -> Result<Self, CliError> {
        let workers = cli.workers.or(file.workers);
        if workers == Some(0) {
            return usage("--workers must be at least 1");
        }
        let output = cli.output.or(file.output.clone());
        let format = cli.format.or(file.format).unwrap_or_default();
        let task = match cli.command {
            CommandArgs::Edd(a) => {
                let streams = streams(a.streams.or(file.streams))?;
                let nu = a.nu.or(file.nu).unwrap_or(0);
                let mu1 = mu1(a.mu1.or(file.mu1).unwrap_or(DEFAULT_MU1))?;
                let level = level(&a.level, &file)?;
                let (trials, seed, horizon) = run(&a.run, &file)?;
                let horizon = horizon.unwrap_or(nu.saturating_add(DEFAULT_EDD_WINDOW));
                if horizon <= nu {
                    return usage(format!("--horizon ({horizon}) must exceed --nu ({nu})"));
                }
                Task::Edd {
                    streams,
                    nu,
                    mu1,
                    level,
                    horizon,
                    trials,
                    seed,
                }
            }
            CommandArgs::Arl(a) => {
                let streams = streams(a.streams.or(file.streams))?;
                let level = level(&a.level, &file)?;
                let (trials, seed, horizon) = run(&a.run, &file)?;
                Task::Arl {
                    streams,
                    level,
                    horizon,
                    trials,
                    seed,
                }
            }
            CommandArgs::Sweep(a) => {
                let mu1_grid = match (a.mu1_grid, file.mu1_grid.take()) {
                    (Some(v), _) => v,
                    (None, Some(g)) => g.into_vec("mu1-grid")?,
                    (None, None) => return usage("sweep needs --mu1-grid"),
                };
                let m_grid = match (a.m_grid, file.m_grid.take()) {
                    (Some(v), _) => v,
                    (None, Some(g)) => g.into_vec("m-grid")?,
                    (None, None) => vec![DEFAULT_STREAMS],
                };
                if mu1_grid.is_empty() || m_grid.is_empty() {
                    return usage("sweep grids must be non-empty");
                }
                for &m in &mu1_grid {
                    mu1(m)?;
                }
                for &m in &m_grid {
                    streams(Some(m))?;
                }
                let threshold = match (a.threshold, file.threshold) {
                    (Some(t), _) | (None, Some(t)) => positive("--threshold", t)?,
                    (None, None) if file.gamma.is_some() => {
                        return usage(
                            "sweep takes --threshold; use `calibrate` to convert a target ARL",
                        )
                    }
                    (None, None) => return usage("sweep needs --threshold"),
                };
                let nu = a.nu.or(file.nu).unwrap_or(0);
                let (trials, seed, horizon) = run(&a.run, &file)?;
                let horizon = horizon.unwrap_or(nu.saturating_add(DEFAULT_EDD_WINDOW));
                if horizon <= nu {
                    return usage(format!("--horizon ({horizon}) must exceed --nu ({nu})"));
                }
                Task::Sweep {
                    mu1_grid,
                    m_grid,
                    nu,
                    threshold,
                    horizon,
                    trials,
                    seed,
                }
            }
            CommandArgs::Calibrate(a) => {
                let gamma = match a.gamma.or(file.gamma) {
                    Some(g) => positive("--gamma", g)?,
                    None => return usage("calibrate needs --gamma"),
                };
                let streams = streams(a.streams.or(file.streams).or(Some(1)))?;
                Task::Calibrate { gamma, streams }
            }
            CommandArgs::Verify(a) => {
                let cases = a.cases.or(file.cases).unwrap_or(DEFAULT_CASES);
                let max_len = a.max_len.or(file.max_len).unwrap_or(DEFAULT_MAX_LEN);
                if cases == 0 || max_len == 0 {
                    return usage("--cases and --max-len must be at least 1");
                }
                let seed = a.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
                Task::Verify {
                    cases,
                    max_len,
                    seed,
                }
            }
        };
        Ok(Self {
            task,
            output,
            format,
            workers,
        })
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn streams(m: Option<usize>) -> Result<usize, CliError> {
    match m.unwrap_or(DEFAULT_STREAMS) {
        0 => usage("number of streams must be at least 1"),
        m => Ok(m),
    }
}

fn mu1(x: f64) -> Result<f64, CliError> {
    if !x.is_finite() || x == 0.0 {
        return usage(format!(
            "post-change mean must be finite and non-zero, got {x}"
        ));
    }
    Ok(x)
}

fn positive(flag: &str, x: f64) -> Result<f64, CliError> {
    if !x.is_finite() || x <= 0.0 {
        return usage(format!("{flag} must be finite and positive, got {x}"));
    }
    Ok(x)
}

/// Flags win over the file as a pair: giving either on the command line
/// discards both file values.
fn level(args: &LevelArgs, file: &FileConfig) -> Result<Level, CliError> {
    let (threshold, gamma) = if args.threshold.is_some() || args.gamma.is_some() {
        (args.threshold, args.gamma)
    } else {
        (file.threshold, file.gamma)
    };
    match (threshold, gamma) {
        (Some(_), Some(_)) => usage("threshold and gamma are mutually exclusive"),
        (Some(t), None) => Ok(Level::Threshold(positive("--threshold", t)?)),
        (None, Some(g)) => Ok(Level::Gamma(positive("--gamma", g)?)),
        (None, None) => usage("one of --threshold or --gamma is required"),
    }
}

fn run(args: &RunArgs, file: &FileConfig) -> Result<(usize, u64, Option<u64>), CliError> {
    let trials = args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return usage("--trials must be at least 1");
    }
    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let horizon = args.horizon.or(file.horizon);
    if horizon == Some(0) {
        return usage("--horizon must be at least 1");
    }
    Ok((trials, seed, horizon))
}

/// Default ARL horizon: `20·e^λ` clamped to a practical range.
pub fn default_arl_horizon(threshold: f64) -> u64 {
    let (lo, hi) = ARL_HORIZON_RANGE;
    let h = (ARL_HORIZON_FACTOR * threshold.exp()).ceil();
    if h.is_nan() || h >= hi as f64 {
        hi
    } else {
        (h as u64).max(lo)
    }
}
