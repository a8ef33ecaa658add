mod support;

use gameseg_core::stats::{granger_test, select_lag_bic, two_sample_ttest, StatsError};
use proptest::prelude::*;
use support::{normal, rng};

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| normal(&mut r)).collect()
}

fn lagged_pair(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let x = noise(n, seed);
    let e = noise(n, seed ^ 0x9e37_79b9);
    let y = (0..n)
        .map(|t| if t == 0 { e[0] } else { 0.8 * x[t - 1] + e[t] })
        .collect();
    (x, y)
}

#[test]
fn granger_size_on_independent_noise() {
    let trials = 200;
    let rejections = (0..trials)
        .filter(|&s| {
            let x = noise(2000, 2 * s);
            let y = noise(2000, 2 * s + 1);
            granger_test(&x, &y, 1, 0.05).unwrap().reject_h0
        })
        .count();
    let rate = rejections as f64 / trials as f64;
    assert!((rate - 0.05).abs() <= 0.03, "rejection rate {rate}");
}

#[test]
fn granger_power_on_lagged_dependence() {
    for seed in 0..200 {
        let (x, y) = lagged_pair(2000, seed);
        let r = granger_test(&x, &y, 1, 0.05).unwrap();
        assert!(
            r.p_value < 1e-3 && r.reject_h0,
            "seed {seed}: p = {}",
            r.p_value
        );
    }
}

#[test]
fn bic_prefers_true_lag() {
    let x = noise(3000, 1);
    let e = noise(3000, 2);
    let y: Vec<f64> = (0..3000)
        .map(|t| if t < 2 { e[t] } else { 0.6 * x[t - 2] + e[t] })
        .collect();
    let sel = select_lag_bic(&[(&x, &y)], 4, false).unwrap();
    assert_eq!(sel.best_lag, 2, "{:?}", sel.bic);
}

#[test]
fn welch_detects_large_drop() {
    let mut r = rng(3);
    let before: Vec<f64> = (0..200).map(|_| 10.0 + normal(&mut r)).collect();
    let after: Vec<f64> = (0..200).map(|_| 5.0 + normal(&mut r)).collect();
    let t = two_sample_ttest(&before, &after).unwrap();
    assert!(t.p_value < 1e-10);
    let drop = t.percent_drop.unwrap();
    assert!((drop - 50.0).abs() <= 2.0, "{drop}");
}

#[test]
fn self_copy_never_rejects() {
    let y = noise(500, 4);
    assert!(matches!(
        granger_test(&y, &y, 1, 0.05),
        Err(StatsError::SingularDesign)
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn f_invariant_under_affine_rescaling(seed in 0u64..10_000, a in 0.1f64..10.0, b in -5.0f64..5.0, c in 0.1f64..10.0) {
        let (x, y) = lagged_pair(300, seed);
        let base = granger_test(&x, &y, 2, 0.05).unwrap();
        let y2: Vec<f64> = y.iter().map(|v| a * v + b).collect();
        let x2: Vec<f64> = x.iter().map(|v| c * v).collect();
        let r = granger_test(&x2, &y2, 2, 0.05).unwrap();
        prop_assert!((r.f_statistic - base.f_statistic).abs() <= 1e-6 * base.f_statistic.max(1.0));
        prop_assert!((r.p_value - base.p_value).abs() <= 1e-9);
        prop_assert!((0.0..=1.0).contains(&r.p_value));
        prop_assert_eq!(r.reject_h0, r.p_value < r.alpha);
    }

    #[test]
    fn ttest_swap_symmetry(seed in 0u64..10_000) {
        let a = noise(20, seed);
        let b: Vec<f64> = noise(30, seed + 1).iter().map(|v| 0.5 + 2.0 * v).collect();
        let x = two_sample_ttest(&a, &b).unwrap();
        let y = two_sample_ttest(&b, &a).unwrap();
        prop_assert_eq!(x.t_statistic, -y.t_statistic);
        prop_assert!((x.p_value - y.p_value).abs() < 1e-15);
    }
}
