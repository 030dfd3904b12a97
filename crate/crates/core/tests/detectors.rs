use decay_focus::detectors::cusum_max_form;
use decay_focus::{glr_stat_bruteforce, Candidate, Cusum, FocusStream};
use proptest::prelude::*;

/// Direct double loop over change starts; no running sums shared with the
/// library code.
fn glr_double_loop(xs: &[f64]) -> f64 {
    let n = xs.len();
    let mut best = 0.0_f64;
    for k in 0..n {
        let s: f64 = xs[k..].iter().sum();
        best = best.max(s * s / (2.0 * (n - k) as f64));
    }
    best
}

fn sequence(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    (
        prop::collection::vec(-3.0..3.0_f64, 1..=max_len),
        -2.0..2.0_f64,
        0.0..1.0_f64,
    )
        .prop_map(|(mut xs, shift, at)| {
            let start = (at * xs.len() as f64) as usize;
            for x in &mut xs[start..] {
                *x += shift;
            }
            xs
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn focus_equals_bruteforce_at_every_prefix(xs in sequence(500)) {
        let mut focus = FocusStream::new();
        for (i, &x) in xs.iter().enumerate() {
            let stat = focus.update(x, i as u64 + 1).unwrap();
            let (oracle, _) = glr_stat_bruteforce(&xs[..=i]).unwrap();
            prop_assert!((stat - oracle).abs() <= 1e-9, "prefix {} : {} vs {}", i, stat, oracle);
            prop_assert!(stat >= 0.0);
        }
    }

    #[test]
    fn cusum_recursion_equals_max_form(xs in sequence(300), mu1 in prop_oneof![-2.0..-0.05_f64, 0.05..2.0_f64]) {
        let mut cusum = Cusum::new(mu1).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let stat = cusum.update(x).unwrap();
            prop_assert!(stat >= 0.0);
            prop_assert!((stat - cusum_max_form(&xs[..=i], mu1)).abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bruteforce_matches_double_loop(xs in sequence(60)) {
        let (stat, k) = glr_stat_bruteforce(&xs).unwrap();
        prop_assert!((stat - glr_double_loop(&xs)).abs() <= 1e-9);
        prop_assert!(k < xs.len());
    }

    #[test]
    fn sign_symmetry(xs in sequence(200)) {
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        prop_assert_eq!(glr_stat_bruteforce(&xs).unwrap(), glr_stat_bruteforce(&neg).unwrap());
        let (mut a, mut b) = (FocusStream::new(), FocusStream::new());
        for (i, (&x, &y)) in xs.iter().zip(&neg).enumerate() {
            let t = i as u64 + 1;
            prop_assert_eq!(a.update(x, t).unwrap(), b.update(y, t).unwrap());
        }
    }

    #[test]
    fn constant_sequence(c in -3.0..3.0_f64, n in 1usize..100) {
        let (stat, k) = glr_stat_bruteforce(&vec![c; n]).unwrap();
        prop_assert!((stat - n as f64 * c * c / 2.0).abs() <= 1e-9);
        prop_assert_eq!(k, 0);
    }

    #[test]
    fn estimate_points_at_argmax(xs in sequence(120)) {
        // Observations at global times 3, 6, 9, ...
        let mut focus = FocusStream::new();
        for (i, &x) in xs.iter().enumerate() {
            focus.update(x, 3 * (i as u64 + 1)).unwrap();
        }
        let k = focus.local_change_index() as usize;
        let s: f64 = xs[k..].iter().sum();
        let value = s * s / (2.0 * (xs.len() - k) as f64);
        prop_assert!((value - focus.stat()).abs() <= 1e-9);
        prop_assert_eq!(focus.local_cp_estimate(), 3 * k as u64);
        prop_assert!(focus.local_cp_estimate() <= focus.last_time());
    }
}

/// GLR over the history extended by `len` observations that all equal
/// `level`, evaluated in closed form, optionally leaving one change start out.
fn extended_glr(xs: &[f64], level: f64, len: f64, skip: Option<u64>) -> f64 {
    let n = xs.len();
    let mut best = 0.0_f64;
    let mut tail = 0.0;
    for k in (0..=n).rev() {
        if k < n {
            tail += xs[k];
        }
        if skip == Some(k as u64) {
            continue;
        }
        let s = tail + level * len;
        best = best.max(s * s / (2.0 * ((n - k) as f64 + len)));
    }
    best
}

/// Each surviving candidate is the unique maximizer for some post-change
/// mean. A long continuation at a mean inside its region makes it the best
/// change start, so dropping it lowers the statistic.
#[test]
fn every_survivor_is_needed() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    for _ in 0..400 {
        let len = rng.random_range(1..=20);
        let xs: Vec<f64> = (0..len).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut focus = FocusStream::new();
        for (i, &x) in xs.iter().enumerate() {
            focus.update(x, i as u64 + 1).unwrap();
        }
        let sides: [(&[Candidate], f64); 2] = [(focus.positive(), 1.0), (focus.negative(), -1.0)];
        for (list, sign) in sides {
            for (j, cand) in list.iter().enumerate() {
                let lo = cand.boundary * sign;
                let hi = list
                    .get(j + 1)
                    .map_or(lo + 2.0, |next| next.boundary * sign);
                if hi - lo < 1e-6 {
                    // Empty region: only a dominated sentinel can look like this.
                    assert_eq!(j, 0);
                    continue;
                }
                let level = sign * (lo + hi) / 2.0;
                let horizon = 1e7;
                let full = extended_glr(&xs, level, horizon, None);
                let without = extended_glr(&xs, level, horizon, Some(cand.n_start));
                assert!(
                    full - without > 1e-9,
                    "candidate {cand:?} on side {sign} is redundant for {xs:?}"
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn candidate_counts() {
    let mut focus = FocusStream::new();
    assert_eq!(focus.candidate_count(), 2);
    focus.update(0.3, 1).unwrap();
    assert_eq!(focus.candidate_count(), 4);
}

#[test]
fn detectors_are_send() {
    fn assert_send<T: Send + 'static>() {}
    assert_send::<FocusStream>();
    assert_send::<Cusum>();
}
