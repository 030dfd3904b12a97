//! Exit criteria for the detector, agent, simulator and calibration code.
//!
//! Each test prints one `[PASS]` / `[FAIL]` line. Run with
//! `cargo test -p decay-focus --test acceptance -- --nocapture` to see them.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use decay_focus::calibrate::c_constant_details;
use decay_focus::detectors::cusum_max_form;
use decay_focus::verify::random_sequence;
use decay_focus::{
    calibrate_threshold, derive_trial_seed, glr_stat_bruteforce, ChangePoint, Cusum, FocusStream,
    MonteCarlo, MonteCarloSummary, TrialConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const SEED: u64 = 42;
const EDD_HORIZON: u64 = 2_000_000;
const ARL_HORIZON: u64 = 50_000;

fn verdict(name: &str, pass: bool, detail: String) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn within_rel(value: f64, target: f64, tol: f64) -> bool {
    ((value - target) / target).abs() <= tol
}

fn edd(n_streams: usize, nu: u64, mu1: f64, lambda: f64, trials: usize) -> MonteCarloSummary {
    let cfg = TrialConfig::new(
        n_streams,
        ChangePoint::At(nu),
        mu1,
        lambda,
        EDD_HORIZON,
        SEED,
    );
    MonteCarlo::default().estimate_edd(&cfg, trials).unwrap()
}

fn arl(n_streams: usize, lambda: f64, trials: usize) -> MonteCarloSummary {
    let cfg = TrialConfig::new(
        n_streams,
        ChangePoint::Never,
        0.0,
        lambda,
        ARL_HORIZON,
        SEED,
    );
    MonteCarlo::default().estimate_arl(&cfg, trials).unwrap()
}

/// (λ = 1000, M = 10, μ1 = 1, ν = 0, 500 trials), shared by several criteria.
fn reference_cell() -> &'static MonteCarloSummary {
    static CELL: OnceLock<MonteCarloSummary> = OnceLock::new();
    CELL.get_or_init(|| edd(10, 0, 1.0, 1000.0, 500))
}

#[test]
fn oracle_equivalence() {
    let start = Instant::now();
    let cases = 1000;
    let mut prefixes = 0u64;
    let mut worst = 0.0_f64;
    for case in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_trial_seed(SEED, case));
        let xs = random_sequence(&mut rng, 300);
        let mut focus = FocusStream::new();
        for (i, &x) in xs.iter().enumerate() {
            let stat = focus.update(x, i as u64 + 1).unwrap();
            let (oracle, _) = glr_stat_bruteforce(&xs[..=i]).unwrap();
            worst = worst.max((stat - oracle).abs());
            prefixes += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "FOCuS ≡ brute-force GLR",
        worst <= 1e-9 && elapsed < Duration::from_secs(60),
        format!("{cases} sequences, {prefixes} prefixes, max |Δ| = {worst:e}, {elapsed:.2?}"),
    );
}

#[test]
fn cusum_recursion_matches_max_form() {
    let start = Instant::now();
    let cases = 1000;
    let mut worst = 0.0_f64;
    for case in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_trial_seed(SEED ^ 1, case));
        let xs = random_sequence(&mut rng, 300);
        let mu1 = [1.0, -1.0, 0.5, 2.0][case as usize % 4];
        let mut cusum = Cusum::new(mu1).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let stat = cusum.update(x).unwrap();
            worst = worst.max((stat - cusum_max_form(&xs[..=i], mu1)).abs());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "CUSUM recursion ≡ max form",
        worst <= 1e-9 && elapsed < Duration::from_secs(10),
        format!("{cases} sequences, max |Δ| = {worst:e}, {elapsed:.2?}"),
    );
}

#[test]
fn edd_reference_cell() {
    let s = reference_cell();
    verdict(
        "EDD reference cell (λ=1000, M=10, μ1=1, ν=0)",
        within_rel(s.mean, 6026.8, 0.05),
        format!("{:.1} ± {:.1} vs 6026.8 (±5%)", s.mean, s.std_error),
    );
}

#[test]
fn edd_ratio_to_cusum_bound() {
    let low = reference_cell();
    let ratio_low = low.mean / 2000.0;
    let high = edd(10, 0, 1.0, 10_000.0, 500);
    let ratio_high = high.mean / 20_000.0;
    verdict(
        "EDD / (2λ/μ1²)",
        within_rel(ratio_low, 3.013, 0.05) && ratio_high < ratio_low,
        format!("λ=1e3: {ratio_low:.3} vs 3.013 (±5%); λ=1e4: {ratio_high:.3} (reference 1.680)"),
    );
}

#[test]
fn sign_symmetry() {
    let pos = reference_cell();
    let neg = edd(10, 0, -1.0, 1000.0, 500);
    let z = pos.z_distance(&neg);
    verdict(
        "EDD sign symmetry (μ1 = ±1)",
        z <= 3.0,
        format!(
            "μ1=+1: {:.1}, μ1=-1: {:.1} (reference 6026.9), {z:.2} pooled SE",
            pos.mean, neg.mean
        ),
    );
}

#[test]
fn arl_reference_cells() {
    let lambda = 1000f64.ln();
    let one = arl(1, lambda, 500);
    let ten = arl(10, lambda, 500);
    verdict(
        "ARL reference cells (λ=log 1000)",
        within_rel(one.mean, 1026.98, 0.10)
            && within_rel(ten.mean, 1107.77, 0.10)
            && one.n_censored == 0
            && ten.n_censored == 0,
        format!(
            "M=1: {:.1} ± {:.1} vs 1026.98; M=10: {:.1} ± {:.1} vs 1107.77 (±10%)",
            one.mean, one.std_error, ten.mean, ten.std_error
        ),
    );
}

#[test]
fn edd_spot_cells() {
    let lambda = 3000f64.ln();
    let a = edd(10, 500, -2.0, lambda, 2000);
    let b = edd(10, 500, 1.0, lambda, 2000);
    verdict(
        "EDD spot cells (ν=500, λ=log 3000, M=10)",
        within_rel(a.mean, 49.4, 0.10) && within_rel(b.mean, 157.8, 0.10),
        format!(
            "μ1=-2: {:.1} ± {:.1} vs 49.4; μ1=1: {:.1} ± {:.1} vs 157.8 (±10%)",
            a.mean, a.std_error, b.mean, b.std_error
        ),
    );
}

#[test]
fn change_point_stability() {
    let at0 = reference_cell();
    let at1000 = edd(10, 1000, 1.0, 1000.0, 500);
    let z = at0.z_distance(&at1000);
    verdict(
        "EDD stable in ν (0 vs 1000)",
        z <= 3.0,
        format!(
            "ν=0: {:.1}, ν=1000: {:.1}, {z:.2} pooled SE",
            at0.mean, at1000.mean
        ),
    );
}

#[test]
fn calibration_self_consistency() {
    let c = c_constant_details().unwrap();
    let k = c.refinements.len();
    let refinement = ((c.refinements[k - 1] - c.refinements[k - 2]) / c.value).abs();
    let gamma = 500.0;
    let lambda = calibrate_threshold(gamma, 1, c.value).unwrap();
    let s = arl(1, lambda, 500);
    verdict(
        "Calibration (C refinement ≤ 1e-6, ARL ≥ 0.9γ at γ=500)",
        refinement <= 1e-6 && s.mean >= 0.9 * gamma,
        format!(
            "C = {:.8} (rel. refinement change {refinement:e}), λ = {lambda:.4}, ARL = {:.1} ± {:.1} vs ≥ {}",
            c.value,
            s.mean,
            s.std_error,
            0.9 * gamma
        ),
    );
}

#[test]
fn focus_candidate_growth() {
    let start = Instant::now();
    let checkpoints = [10u64, 100, 1_000, 10_000, 100_000];
    let reps = 20;
    let mut totals = [0.0; 5];
    for rep in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_trial_seed(SEED ^ 2, rep));
        let mut focus = FocusStream::new();
        let mut next = 0;
        for t in 1..=100_000u64 {
            focus.update(StandardNormal.sample(&mut rng), t).unwrap();
            if t == checkpoints[next] {
                totals[next] += focus.candidate_count() as f64;
                next += 1;
            }
        }
    }
    let means: Vec<f64> = totals.iter().map(|s| s / reps as f64).collect();
    // Least squares fit of mean count against ln t.
    let xs: Vec<f64> = checkpoints.iter().map(|&t| (t as f64).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, means.iter().sum::<f64>() / n);
    let sxy: f64 = xs
        .iter()
        .zip(&means)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&means)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = means.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    let last = means[4];
    let growth = means[4] / means[3];
    let elapsed = start.elapsed();
    verdict(
        "FOCuS candidate set is O(log t)",
        last <= 50.0
            && slope > 0.0
            && slope.is_finite()
            && r2 >= 0.9
            && growth < 2.0
            && elapsed < Duration::from_secs(30),
        format!(
            "means {means:.2?} at t={checkpoints:?}; fit {intercept:.2} + {slope:.2}·ln t (R² {r2:.3}); \
             count(1e5)/count(1e4) = {growth:.2}; {elapsed:.2?}"
        ),
    );
}
