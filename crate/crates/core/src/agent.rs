//! The decaying-ε multi-stream agent.
//!
//! Each tick the agent flips an exploration coin with probability
//! `ε_t = min{1, M / max(1, t − ν̂_{t−1})^{1/3}}`. Heads samples a stream
//! uniformly at random, tails samples the current leader (the stream with
//! the largest local GLR statistic). The sampled stream's FOCuS state is
//! updated, the leader and change-point estimate are refreshed, and the
//! agent stops once the largest local statistic reaches the threshold.
//!
//! The agent owns the trial's random generator. Draws happen in a fixed
//! order per tick: exploration coin, explored arm (if exploring), the
//! observation (drawn by the caller through [`Agent::rng_mut`]) and the
//! leader tie-break (only when several streams share the maximum).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detectors::FocusStream;
use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub n_streams: usize,
    pub threshold: f64,
    pub seed: u64,
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_streams == 0 {
            return Err(Error::Domain("at least one stream is required".into()));
        }
        if self.threshold.is_nan() || self.threshold <= 0.0 {
            return Err(Error::Domain(format!(
                "threshold must be positive, got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Probability of exploring at tick `t` given the previous change-point
/// estimate.
pub fn epsilon_schedule(t: u64, cp_estimate: u64, n_streams: usize) -> f64 {
    let gap = t.saturating_sub(cp_estimate).max(1) as f64;
    (n_streams as f64 / gap.cbrt()).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub arm: usize,
    pub explored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    config: AgentConfig,
    rng: ChaCha8Rng,
    t: u64,
    streams: Vec<FocusStream>,
    stats: MaxTree,
    leader: usize,
    global_cp_estimate: u64,
    stopped: bool,
    declared_stream: Option<usize>,
}

impl Agent {
    pub fn new(config: AgentConfig) -> Result<Self> {
        config.validate()?;
        let mut agent = Self {
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            t: 0,
            streams: vec![FocusStream::new(); config.n_streams],
            stats: MaxTree::new(config.n_streams),
            leader: 0,
            global_cp_estimate: 0,
            stopped: false,
            declared_stream: None,
        };
        // Every statistic is 0, so this draws the initial leader uniformly.
        agent.refresh_leader();
        Ok(agent)
    }

    /// Exploration probability for the upcoming tick.
    pub fn epsilon(&self) -> f64 {
        epsilon_schedule(self.t + 1, self.global_cp_estimate, self.config.n_streams)
    }

    /// Draw the exploration coin and choose the stream to observe next.
    pub fn select_stream(&mut self) -> Result<Selection> {
        self.ensure_running()?;
        let eps = self.epsilon();
        let explore = self.rng.random::<f64>() < eps;
        self.select_with(explore)
    }

    /// Choose the next stream with the exploration decision fixed by the
    /// caller.
    pub fn select_with(&mut self, explore: bool) -> Result<Selection> {
        self.ensure_running()?;
        let arm = if explore {
            self.rng.random_range(0..self.config.n_streams)
        } else {
            self.leader
        };
        Ok(Selection {
            arm,
            explored: explore,
        })
    }

    /// Record observation `x` from stream `arm` and advance the clock.
    /// Returns whether the agent has stopped.
    pub fn step(&mut self, x: f64, arm: usize) -> Result<bool> {
        self.ensure_running()?;
        ensure_finite(x, "observation")?;
        if arm >= self.config.n_streams {
            return Err(Error::Contract(format!(
                "stream {arm} out of range for {} streams",
                self.config.n_streams
            )));
        }
        let t = self.t + 1;
        let stat = self.streams[arm].update(x, t)?;
        self.t = t;
        self.stats.set(arm, stat);
        self.refresh_leader();
        if self.max_stat() >= self.config.threshold {
            self.stopped = true;
            self.declared_stream = Some(self.leader);
        }
        Ok(self.stopped)
    }

    fn refresh_leader(&mut self) {
        let ties = self.stats.max_count();
        let rank = if ties > 1 {
            self.rng.random_range(0..ties)
        } else {
            0
        };
        self.leader = self.stats.nth_maximizer(rank);
        self.global_cp_estimate = self.streams[self.leader].local_cp_estimate();
    }

    fn ensure_running(&self) -> Result<()> {
        if self.stopped {
            Err(Error::Contract("agent has already stopped".into()))
        } else {
            Ok(())
        }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    /// Generator shared with the observation source.
    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn streams(&self) -> &[FocusStream] {
        &self.streams
    }

    pub fn leader(&self) -> usize {
        self.leader
    }

    pub fn global_cp_estimate(&self) -> u64 {
        self.global_cp_estimate
    }

    /// Largest local statistic `T_t`.
    pub fn max_stat(&self) -> f64 {
        self.stats.max()
    }

    pub fn stopped(&self) -> bool {
        self.stopped
    }

    pub fn declared_stream(&self) -> Option<usize> {
        self.declared_stream
    }

    pub fn pull_counts(&self) -> Vec<u64> {
        self.streams.iter().map(FocusStream::n_obs).collect()
    }
}

/// Tournament tree over the per-stream statistics tracking the maximum and
/// how many streams attain it, so a tick costs O(log M).
#[derive(Debug, Clone, PartialEq)]
struct MaxTree {
    width: usize,
    nodes: Vec<(f64, usize)>,
}

impl MaxTree {
    fn new(n: usize) -> Self {
        let width = n.next_power_of_two();
        let mut nodes = vec![(f64::NEG_INFINITY, 0); 2 * width];
        for leaf in &mut nodes[width..width + n] {
            *leaf = (0.0, 1);
        }
        let mut tree = Self { width, nodes };
        for i in (1..width).rev() {
            tree.pull(i);
        }
        tree
    }

    fn combine(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
        if a.0 > b.0 {
            a
        } else if b.0 > a.0 {
            b
        } else {
            (a.0, a.1 + b.1)
        }
    }

    fn pull(&mut self, i: usize) {
        self.nodes[i] = Self::combine(self.nodes[2 * i], self.nodes[2 * i + 1]);
    }

    fn set(&mut self, index: usize, value: f64) {
        let mut i = self.width + index;
        self.nodes[i] = (value, 1);
        while i > 1 {
            i /= 2;
            self.pull(i);
        }
    }

    fn max(&self) -> f64 {
        self.nodes[1].0
    }

    fn max_count(&self) -> usize {
        self.nodes[1].1
    }

    /// Index of the `rank`-th (0-based, left to right) stream attaining the maximum.
    fn nth_maximizer(&self, mut rank: usize) -> usize {
        let target = self.max();
        let mut i = 1;
        while i < self.width {
            let left = self.nodes[2 * i];
            if left.0 == target {
                if rank < left.1 {
                    i *= 2;
                    continue;
                }
                rank -= left.1;
            }
            i = 2 * i + 1;
        }
        i - self.width
    }
}
