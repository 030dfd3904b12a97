use crate::error::{ensure_finite, Result};

/// Two-sided Gaussian GLR statistic by direct enumeration of every change
/// start `0 ≤ k < n`:
///
/// `max_k (Σ_{i=k+1}^{n} x_i)² / (2(n − k))`
///
/// Returns the statistic and the maximizing `k` (smallest on ties).
/// An empty sequence gives `(0.0, 0)`.
pub fn glr_stat_bruteforce(xs: &[f64]) -> Result<(f64, usize)> {
    let mut best = (0.0, 0);
    let mut found = false;
    let mut tail = 0.0;
    // Walk k downwards so the suffix sum is a running total; `>=` keeps the
    // smallest k among equal values.
    for (k, &x) in xs.iter().enumerate().rev() {
        ensure_finite(x, "observation")?;
        tail += x;
        let len = (xs.len() - k) as f64;
        let value = tail * tail / (2.0 * len);
        if !found || value >= best.0 {
            best = (value, k);
            found = true;
        }
    }
    Ok(best)
}
