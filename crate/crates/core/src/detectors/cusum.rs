use crate::error::{ensure_finite, Error, Result};

/// Page's CUSUM for a shift from N(0, 1) to N(mu1, 1).
///
/// Updated with the constant-time recursion
/// `T_t = max(ℓ(x_t) + T_{t−1}, 0)` where `ℓ(x) = mu1·x − mu1²/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cusum {
    stat: f64,
    mu1: f64,
    n_obs: u64,
}

impl Cusum {
    pub fn new(mu1: f64) -> Result<Self> {
        ensure_finite(mu1, "post-change mean")?;
        if mu1 == 0.0 {
            return Err(Error::Domain("post-change mean must be non-zero".into()));
        }
        Ok(Self {
            stat: 0.0,
            mu1,
            n_obs: 0,
        })
    }

    /// Log-likelihood ratio of one observation.
    #[inline]
    pub fn llr(&self, x: f64) -> f64 {
        self.mu1 * x - 0.5 * self.mu1 * self.mu1
    }

    /// Feed one observation and return the new statistic.
    pub fn update(&mut self, x: f64) -> Result<f64> {
        ensure_finite(x, "observation")?;
        self.stat = (self.llr(x) + self.stat).max(0.0);
        self.n_obs += 1;
        Ok(self.stat)
    }

    pub fn stat(&self) -> f64 {
        self.stat
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn n_obs(&self) -> u64 {
        self.n_obs
    }
}

/// CUSUM statistic recomputed from scratch as the maximum over all
/// `0 ≤ k ≤ n` of the partial LLR sums `Σ_{i=k+1}^{n} ℓ(x_i)` (the `k = n`
/// term is the empty sum, 0).
pub fn cusum_max_form(xs: &[f64], mu1: f64) -> f64 {
    let llr = |x: f64| mu1 * x - 0.5 * mu1 * mu1;
    let mut best = 0.0_f64;
    let mut tail = 0.0;
    for &x in xs.iter().rev() {
        tail += llr(x);
        best = best.max(tail);
    }
    best
}
