//! FOCuS: online two-sided Gaussian GLR by functional pruning.
//!
//! Every past change start `k` defines a quadratic in the post-change mean
//! `μ`, `C_k(μ) = μ(S − s_k) − (N − n_k)μ²/2`, whose maximum over `μ` is the
//! GLR term `(S − s_k)² / (2(N − k))`. For two starts `i < j` the difference
//! `C_i − C_j = μ[(s_j − s_i) − (n_j − n_i)μ/2]` does not depend on future
//! data, so the later start dominates the earlier one for every
//! `μ > 2(s_j − s_i)/(n_j − n_i)` from now on. Each side (μ > 0 and μ < 0)
//! keeps the starts that are still maximal for some μ on that side, with the
//! μ value at which each one overtakes its predecessor stored as its
//! `boundary`. A new start pops every tail candidate whose region it covers,
//! then records its own boundary against the last survivor.

use crate::error::{ensure_finite, Error, Result};

/// One potential change start in a FOCuS candidate list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    /// Observations seen on the stream when the segment begins.
    pub n_start: u64,
    /// Running sum at `n_start`.
    pub s_start: f64,
    /// μ at which this candidate overtakes its predecessor; 0 for the sentinel.
    pub boundary: f64,
    /// Global time of the observation that created the candidate (0 for the sentinel).
    pub start_time: u64,
}

impl Candidate {
    const SENTINEL: Candidate = Candidate {
        n_start: 0,
        s_start: 0.0,
        boundary: 0.0,
        start_time: 0,
    };

    /// GLR value of the segment `(n_start, n_obs]`, or `None` if it is empty.
    #[inline]
    fn glr(&self, n_obs: u64, sum: f64) -> Option<f64> {
        (n_obs > self.n_start).then(|| {
            let diff = sum - self.s_start;
            diff * diff / (2.0 * (n_obs - self.n_start) as f64)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocusStream {
    n_obs: u64,
    sum: f64,
    pos: Vec<Candidate>,
    neg: Vec<Candidate>,
    stat: f64,
    local_cp_estimate: u64,
    local_change_index: u64,
    last_time: u64,
}

impl Default for FocusStream {
    fn default() -> Self {
        Self::new()
    }
}

impl FocusStream {
    pub fn new() -> Self {
        Self {
            n_obs: 0,
            sum: 0.0,
            pos: vec![Candidate::SENTINEL],
            neg: vec![Candidate::SENTINEL],
            stat: 0.0,
            local_cp_estimate: 0,
            local_change_index: 0,
            last_time: 0,
        }
    }

    /// Feed the stream's next observation, taken at global time `t`, and
    /// return the updated statistic.
    pub fn update(&mut self, x: f64, t: u64) -> Result<f64> {
        ensure_finite(x, "observation")?;
        if t <= self.last_time {
            return Err(Error::Contract(format!(
                "observation time {t} is not after previous time {}",
                self.last_time
            )));
        }
        self.last_time = t;
        self.n_obs += 1;
        self.sum += x;

        let (n, s) = (self.n_obs, self.sum);
        push_pruned(&mut self.pos, n, s, t, Side::Positive);
        push_pruned(&mut self.neg, n, s, t, Side::Negative);
        self.rescan();
        Ok(self.stat)
    }

    fn rescan(&mut self) {
        let mut best: Option<(f64, &Candidate)> = None;
        for cand in self.pos.iter().chain(self.neg.iter()) {
            if let Some(v) = cand.glr(self.n_obs, self.sum) {
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, cand));
                }
            }
        }
        if let Some((v, cand)) = best {
            self.stat = v;
            self.local_cp_estimate = cand.start_time;
            self.local_change_index = cand.n_start;
        }
    }

    /// Current GLR statistic; 0 before any observation.
    pub fn stat(&self) -> f64 {
        self.stat
    }

    /// Global time of the maximizing candidate's creation, i.e. the time of
    /// the last observation before the estimated change.
    pub fn local_cp_estimate(&self) -> u64 {
        self.local_cp_estimate
    }

    /// Number of stream observations before the estimated change (the
    /// maximizing `k` in stream-local indexing).
    pub fn local_change_index(&self) -> u64 {
        self.local_change_index
    }

    pub fn n_obs(&self) -> u64 {
        self.n_obs
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn last_time(&self) -> u64 {
        self.last_time
    }

    pub fn positive(&self) -> &[Candidate] {
        &self.pos
    }

    pub fn negative(&self) -> &[Candidate] {
        &self.neg
    }

    /// Total size of both candidate lists, sentinels included.
    pub fn candidate_count(&self) -> usize {
        self.pos.len() + self.neg.len()
    }
}

#[derive(Clone, Copy)]
enum Side {
    Positive,
    Negative,
}

fn push_pruned(list: &mut Vec<Candidate>, n: u64, s: f64, t: u64, side: Side) {
    // The sentinel at index 0 is never popped.
    while list.len() > 1 {
        let last = list[list.len() - 1];
        let dn = (n - last.n_start) as f64;
        let slack = 2.0 * (s - last.s_start) - dn * last.boundary;
        let covered = match side {
            Side::Positive => slack <= 0.0,
            Side::Negative => slack >= 0.0,
        };
        if !covered {
            break;
        }
        list.pop();
    }
    let prev = list[list.len() - 1];
    let crossing = 2.0 * (s - prev.s_start) / (n - prev.n_start) as f64;
    let boundary = match side {
        Side::Positive => crossing.max(0.0),
        Side::Negative => crossing.min(0.0),
    };
    list.push(Candidate {
        n_start: n,
        s_start: s,
        boundary,
        start_time: t,
    });
}
