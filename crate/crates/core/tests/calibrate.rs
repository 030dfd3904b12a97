use decay_focus::calibrate::{c_constant_details, c_constant_with_limits, X_HI, X_LO};
use decay_focus::{
    arl_lower_bound, calibrate_threshold, compute_c_constant, ChangePoint, MonteCarlo, TrialConfig,
};

#[test]
fn c_is_positive_and_refinement_stable() {
    let c = c_constant_details().unwrap();
    assert!(c.value > 0.0);
    let k = c.refinements.len();
    assert!(k >= 2);
    let halving = ((c.refinements[k - 1] - c.refinements[k - 2]) / c.value).abs();
    assert!(halving < 1e-6, "{halving:e}");
    assert!(c.error_estimate < 1e-6);
}

#[test]
fn c_tail_truncation() {
    let base = c_constant_details().unwrap().value;
    let wide = c_constant_with_limits(X_LO, 2.0 * X_HI).unwrap().value;
    assert!(((wide - base) / base).abs() < 1e-8);
}

#[test]
fn c_lower_limit_correction_is_consistent() {
    // Halving x_lo moves C by far less than the mass below x_lo (≈ 5e-5).
    let base = c_constant_details().unwrap().value;
    let lower = c_constant_with_limits(X_LO / 2.0, X_HI).unwrap().value;
    assert!(((lower - base) / base).abs() < 1e-6);
}

#[test]
fn c_is_reproducible() {
    let (a, _) = compute_c_constant().unwrap();
    let b = c_constant_with_limits(X_LO, X_HI).unwrap().value;
    assert!(((a - b) / a).abs() < 1e-6);
}

#[test]
fn empirical_arl_respects_bound() {
    // Over a subset of the run-length grid the simulated ARL stays above
    // the asymptotic bound e^λ/(M√λC).
    let (c, _) = compute_c_constant().unwrap();
    let mc = MonteCarlo::default();
    for gamma in [1e3, 3e3] {
        for m in [1usize, 3, 10] {
            let lambda = f64::ln(gamma);
            let cfg = TrialConfig::new(m, ChangePoint::Never, 0.0, lambda, 100_000, 13);
            let s = mc.estimate_arl(&cfg, 300).unwrap();
            let bound = arl_lower_bound(lambda, m, c).unwrap();
            assert!(s.warning.is_none());
            assert!(
                s.mean >= bound - 3.0 * s.std_error,
                "γ={gamma} M={m}: {} < {bound}",
                s.mean
            );
        }
    }
}

#[test]
fn bound_at_calibrated_threshold() {
    let (c, _) = compute_c_constant().unwrap();
    let lambda = calibrate_threshold(1000.0, 1, c).unwrap();
    let bound = arl_lower_bound(lambda, 1, c).unwrap();
    assert!((bound - 1000.0 / lambda.sqrt()).abs() < 1e-9);
}
