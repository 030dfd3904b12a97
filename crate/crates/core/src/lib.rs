//! Bandit quickest change detection with a decaying-ε exploration rule on
//! top of the FOCuS implementation of the Gaussian GLR statistic.
//!
//! The crate is split along the lines of the procedure:
//!
//! - [`detectors`]: single-stream statistics (CUSUM, brute-force GLR, FOCuS).
//! - [`agent`]: the multi-stream sampling agent and its stopping rule.
//! - [`sim`]: observation model, single trials and Monte Carlo EDD/ARL estimates.
//! - [`calibrate`]: the false-alarm constant `C` and threshold selection.
//! - [`verify`]: self-contained oracle suites used by the CLI `verify` command.

pub mod agent;
pub mod calibrate;
pub mod detectors;
mod error;
pub mod sim;
pub mod verify;

pub use agent::{epsilon_schedule, Agent, AgentConfig, Selection};
pub use calibrate::{
    arl_lower_bound, calibrate_threshold, compute_c_constant, g_function, CalibrationResult,
};
pub use detectors::{glr_stat_bruteforce, Candidate, Cusum, FocusStream};
pub use error::{Error, Result};
pub use sim::{
    derive_trial_seed, generate_observation, run_trial, ChangePoint, MonteCarlo, MonteCarloSummary,
    SummaryWarning, TrialConfig, TrialOutcome,
};
