//! Observation model, single trials and Monte Carlo estimation of the
//! expected detection delay (EDD) and the average run length (ARL).
//!
//! Trials are independent: trial `i` of a batch runs with seed
//! [`derive_trial_seed`]`(master, i)`, so results do not depend on how
//! trials are scheduled across workers. Reductions always walk the
//! outcomes in trial-index order.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, AgentConfig};
use crate::error::{Error, Result};

/// Change-point location ν: the change affects observations at ticks `t > ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangePoint {
    At(u64),
    Never,
}

impl ChangePoint {
    #[inline]
    pub fn is_post_change(self, t: u64) -> bool {
        match self {
            ChangePoint::At(nu) => t > nu,
            ChangePoint::Never => false,
        }
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            ChangePoint::At(nu) => Some(nu),
            ChangePoint::Never => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n_streams: usize,
    pub change_point: ChangePoint,
    pub mu0: f64,
    pub mu1: f64,
    pub threshold: f64,
    /// Ticks after which an undetected run is censored.
    pub horizon: u64,
    pub seed: u64,
    /// 0-based index of the stream that changes.
    pub changed_stream: usize,
}

impl TrialConfig {
    /// Config with `mu0 = 0` and the change placed on the last stream.
    pub fn new(
        n_streams: usize,
        change_point: ChangePoint,
        mu1: f64,
        threshold: f64,
        horizon: u64,
        seed: u64,
    ) -> Self {
        Self {
            n_streams,
            change_point,
            mu0: 0.0,
            mu1,
            threshold,
            horizon,
            seed,
            changed_stream: n_streams.saturating_sub(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.agent_config().validate()?;
        if self.horizon == 0 {
            return Err(Error::Domain("horizon must be positive".into()));
        }
        if self.changed_stream >= self.n_streams {
            return Err(Error::Domain(format!(
                "changed stream {} out of range for {} streams",
                self.changed_stream, self.n_streams
            )));
        }
        if !self.mu0.is_finite() || !self.mu1.is_finite() {
            return Err(Error::Domain("means must be finite".into()));
        }
        Ok(())
    }

    pub fn agent_config(&self) -> AgentConfig {
        AgentConfig {
            n_streams: self.n_streams,
            threshold: self.threshold,
            seed: self.seed,
        }
    }

    /// Same experiment with a different seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// One unit-variance Gaussian observation from stream `arm` at tick `t`.
pub fn generate_observation<R: Rng + ?Sized>(
    cfg: &TrialConfig,
    arm: usize,
    t: u64,
    rng: &mut R,
) -> f64 {
    let mean = if arm == cfg.changed_stream && cfg.change_point.is_post_change(t) {
        cfg.mu1
    } else {
        cfg.mu0
    };
    let z: f64 = rng.sample(StandardNormal);
    mean + z
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// τ, or the horizon when censored.
    pub stopping_time: u64,
    pub declared_stream: Option<usize>,
    pub cp_estimate_at_stop: u64,
    pub final_stat: f64,
    pub censored: bool,
    /// τ − ν for a detection after the change.
    pub detection_delay: Option<u64>,
    /// Stopped at or before the change (always the case without a change).
    pub false_alarm: bool,
}

/// One tick of a recorded trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub t: u64,
    pub arm: usize,
    pub x: f64,
    pub explored: bool,
}

fn drive(cfg: &TrialConfig, mut record: impl FnMut(Observation)) -> Result<TrialOutcome> {
    cfg.validate()?;
    let mut agent = Agent::new(cfg.agent_config())?;
    while agent.t() < cfg.horizon {
        let sel = agent.select_stream()?;
        let t = agent.t() + 1;
        let x = generate_observation(cfg, sel.arm, t, agent.rng_mut());
        record(Observation {
            t,
            arm: sel.arm,
            x,
            explored: sel.explored,
        });
        if agent.step(x, sel.arm)? {
            break;
        }
    }
    let tau = agent.t();
    let censored = !agent.stopped();
    let (detection_delay, false_alarm) = match (censored, cfg.change_point) {
        (true, _) => (None, false),
        (false, ChangePoint::At(nu)) if tau > nu => (Some(tau - nu), false),
        (false, _) => (None, true),
    };
    Ok(TrialOutcome {
        stopping_time: tau,
        declared_stream: agent.declared_stream(),
        cp_estimate_at_stop: agent.global_cp_estimate(),
        final_stat: agent.max_stat(),
        censored,
        detection_delay,
        false_alarm,
    })
}

/// Run the agent against simulated streams until it stops or reaches the
/// horizon. Deterministic in `cfg.seed`.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialOutcome> {
    drive(cfg, |_| {})
}

/// [`run_trial`] that also returns every observation the agent saw.
pub fn run_trial_recorded(cfg: &TrialConfig) -> Result<(TrialOutcome, Vec<Observation>)> {
    let mut log = Vec::new();
    let outcome = drive(cfg, |obs| log.push(obs))?;
    Ok((outcome, log))
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`: the `index + 1`-th SplitMix64
/// output of a generator started at `master`.
pub fn derive_trial_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

/// Attached to a summary whose estimate is known to be biased.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryWarning {
    /// More than 5% of ARL runs hit the horizon; the mean is biased low.
    HeavyCensoring { fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub mean: f64,
    pub std_error: f64,
    pub n_trials: usize,
    pub n_censored: usize,
    pub n_false_alarms: usize,
    pub warning: Option<SummaryWarning>,
}

impl MonteCarloSummary {
    /// Difference of two means in units of their pooled standard error.
    pub fn z_distance(&self, other: &MonteCarloSummary) -> f64 {
        let pooled = (self.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        (self.mean - other.mean).abs() / pooled
    }
}

const MAX_ARL_CENSOR_FRACTION: f64 = 0.05;

fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Delay summary over trials that detected after the change. Censored runs
/// and false alarms are counted and left out of the mean.
pub fn summarize_edd(outcomes: &[TrialOutcome]) -> Result<MonteCarloSummary> {
    let delays: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.detection_delay.map(|d| d as f64))
        .collect();
    let n_censored = outcomes.iter().filter(|o| o.censored).count();
    let n_false_alarms = outcomes.iter().filter(|o| o.false_alarm).count();
    if delays.is_empty() {
        return Err(Error::Estimation(format!(
            "no usable detections in {} trials ({n_censored} censored, {n_false_alarms} false alarms)",
            outcomes.len()
        )));
    }
    let (mean, std_error) = mean_and_std_error(&delays);
    Ok(MonteCarloSummary {
        mean,
        std_error,
        n_trials: outcomes.len(),
        n_censored,
        n_false_alarms,
        warning: None,
    })
}

/// Run-length summary. Censored runs enter the mean at the horizon and a
/// warning is attached when they exceed 5% of the trials.
pub fn summarize_arl(outcomes: &[TrialOutcome]) -> Result<MonteCarloSummary> {
    if outcomes.is_empty() {
        return Err(Error::Estimation("no trials".into()));
    }
    let lengths: Vec<f64> = outcomes.iter().map(|o| o.stopping_time as f64).collect();
    let n_censored = outcomes.iter().filter(|o| o.censored).count();
    let (mean, std_error) = mean_and_std_error(&lengths);
    let fraction = n_censored as f64 / outcomes.len() as f64;
    Ok(MonteCarloSummary {
        mean,
        std_error,
        n_trials: outcomes.len(),
        n_censored,
        n_false_alarms: outcomes.len() - n_censored,
        warning: (fraction > MAX_ARL_CENSOR_FRACTION)
            .then_some(SummaryWarning::HeavyCensoring { fraction }),
    })
}

/// One `(μ1, M)` cell of an EDD sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub mu1: f64,
    pub n_streams: usize,
    pub config: TrialConfig,
    pub summary: Result<MonteCarloSummary>,
}

const SWEEP_SALT: u64 = 0x5EED_5EED_5EED_5EED;

/// Parallel trial runner. `workers = None` uses the global rayon pool.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MonteCarlo {
    pub workers: Option<usize>,
}

impl MonteCarlo {
    pub fn new(workers: Option<usize>) -> Self {
        Self { workers }
    }

    /// Run `n_trials` trials of `cfg`, using `cfg.seed` as the master seed.
    pub fn run_trials(&self, cfg: &TrialConfig, n_trials: usize) -> Result<Vec<TrialOutcome>> {
        cfg.validate()?;
        let job = || {
            (0..n_trials)
                .into_par_iter()
                .map(|i| run_trial(&cfg.with_seed(derive_trial_seed(cfg.seed, i as u64))))
                .collect::<Result<Vec<_>>>()
        };
        match self.workers {
            None => job(),
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Contract(format!("cannot build worker pool: {e}")))?
                .install(job),
        }
    }

    pub fn estimate_edd(&self, cfg: &TrialConfig, n_trials: usize) -> Result<MonteCarloSummary> {
        if cfg.change_point == ChangePoint::Never {
            return Err(Error::Domain("EDD needs a finite change point".into()));
        }
        if n_trials == 0 {
            return Err(Error::Domain("at least one trial is required".into()));
        }
        summarize_edd(&self.run_trials(cfg, n_trials)?)
    }

    pub fn estimate_arl(&self, cfg: &TrialConfig, n_trials: usize) -> Result<MonteCarloSummary> {
        if cfg.change_point != ChangePoint::Never {
            return Err(Error::Domain("ARL runs must not contain a change".into()));
        }
        if n_trials == 0 {
            return Err(Error::Domain("at least one trial is required".into()));
        }
        summarize_arl(&self.run_trials(cfg, n_trials)?)
    }

    /// EDD for every `(M, μ1)` pair, `M` in the outer loop. `base` supplies
    /// ν, λ, the horizon and the master seed; each cell gets its own seed.
    /// A failing cell is reported in place without aborting the sweep.
    pub fn sweep_edd(
        &self,
        base: &TrialConfig,
        mu1_grid: &[f64],
        m_grid: &[usize],
        n_trials: usize,
    ) -> Result<Vec<SweepCell>> {
        if mu1_grid.is_empty() || m_grid.is_empty() {
            return Err(Error::Domain("sweep grids must be non-empty".into()));
        }
        let mut cells = Vec::with_capacity(mu1_grid.len() * m_grid.len());
        for &m in m_grid {
            for &mu1 in mu1_grid {
                let index = cells.len() as u64;
                let config = TrialConfig {
                    n_streams: m,
                    mu1,
                    changed_stream: m.saturating_sub(1),
                    seed: derive_trial_seed(base.seed ^ SWEEP_SALT, index),
                    ..*base
                };
                let summary = self.estimate_edd(&config, n_trials);
                cells.push(SweepCell {
                    mu1,
                    n_streams: m,
                    config,
                    summary,
                });
            }
        }
        Ok(cells)
    }
}

/// [`MonteCarlo::estimate_edd`] on the global pool.
pub fn estimate_edd(cfg: &TrialConfig, n_trials: usize) -> Result<MonteCarloSummary> {
    MonteCarlo::default().estimate_edd(cfg, n_trials)
}

/// [`MonteCarlo::estimate_arl`] on the global pool.
pub fn estimate_arl(cfg: &TrialConfig, n_trials: usize) -> Result<MonteCarloSummary> {
    MonteCarlo::default().estimate_arl(cfg, n_trials)
}
