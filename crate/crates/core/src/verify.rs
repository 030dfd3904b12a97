//! Randomized self-checks of the online detectors against their from-scratch
//! definitions. Exposed for the CLI so a build can be checked in place.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::detectors::{cusum_max_form, glr_stat_bruteforce, Cusum, FocusStream};
use crate::error::Result;
use crate::sim::derive_trial_seed;

/// Absolute tolerance for every oracle comparison.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub prefixes_checked: u64,
    pub max_abs_error: f64,
    pub failures: usize,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Gaussian sequence with a random length in `1..=max_len` and, half of the
/// time, a mean shift of random size and sign somewhere inside it.
pub fn random_sequence<R: Rng>(rng: &mut R, max_len: usize) -> Vec<f64> {
    let len = rng.random_range(1..=max_len.max(1));
    let shift_at = rng.random_range(0..len);
    let shift = if rng.random::<bool>() {
        rng.random_range(-3.0..3.0)
    } else {
        0.0
    };
    (0..len)
        .map(|i| {
            let z: f64 = rng.sample(StandardNormal);
            z + if i >= shift_at { shift } else { 0.0 }
        })
        .collect()
}

/// FOCuS statistic against [`glr_stat_bruteforce`] at every prefix, plus
/// the sign-flip symmetry of the statistic.
pub fn focus_oracle_suite(cases: usize, max_len: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        name: "FOCuS ≡ GLR oracle",
        cases,
        prefixes_checked: 0,
        max_abs_error: 0.0,
        failures: 0,
    };
    for case in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_trial_seed(seed, case as u64));
        let xs = random_sequence(&mut rng, max_len);
        let mut focus = FocusStream::new();
        let mut mirror = FocusStream::new();
        let mut failed = false;
        for (i, &x) in xs.iter().enumerate() {
            let t = i as u64 + 1;
            let stat = focus.update(x, t)?;
            let flipped = mirror.update(-x, t)?;
            let (oracle, _) = glr_stat_bruteforce(&xs[..=i])?;
            let err = (stat - oracle).abs();
            report.max_abs_error = report.max_abs_error.max(err);
            report.prefixes_checked += 1;
            failed |= err > ORACLE_TOLERANCE || stat != flipped || stat < 0.0;
        }
        report.failures += usize::from(failed);
    }
    Ok(report)
}

/// CUSUM recursion against the max-over-partial-sums form at every prefix.
pub fn cusum_oracle_suite(cases: usize, max_len: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        name: "CUSUM recursion ≡ max form",
        cases,
        prefixes_checked: 0,
        max_abs_error: 0.0,
        failures: 0,
    };
    for case in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_trial_seed(seed ^ 0xC05, case as u64));
        let xs = random_sequence(&mut rng, max_len);
        let mu1 = loop {
            let m: f64 = rng.random_range(-2.0..2.0);
            if m.abs() > 1e-3 {
                break m;
            }
        };
        let mut cusum = Cusum::new(mu1)?;
        let mut failed = false;
        for (i, &x) in xs.iter().enumerate() {
            let stat = cusum.update(x)?;
            let err = (stat - cusum_max_form(&xs[..=i], mu1)).abs();
            report.max_abs_error = report.max_abs_error.max(err);
            report.prefixes_checked += 1;
            failed |= err > ORACLE_TOLERANCE || stat < 0.0;
        }
        report.failures += usize::from(failed);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(focus_oracle_suite(30, 80, 1).unwrap().passed());
        assert!(cusum_oracle_suite(30, 80, 1).unwrap().passed());
    }
}
