mod support;

use gameseg_core::stats::{f_survival, t_survival};
use support::{f_survival_oracle, t_survival_oracle};

#[test]
fn quadrature_oracle_sanity() {
    assert!((t_survival_oracle(1.0, 1.0) - 0.25).abs() < 1e-13);
    assert!((f_survival_oracle(1.0, 1.0, 1.0) - 0.5).abs() < 1e-13);
    // F(2, d2) has the closed form (1 + 2x/d2)^(-d2/2).
    for (x, d2) in [(0.5, 3.0), (3.0, 10.0)] {
        let exact = (1.0f64 + 2.0 * x / d2).powf(-d2 / 2.0);
        assert!((f_survival_oracle(x, 2.0, d2) - exact).abs() < 1e-13);
    }
}

#[test]
fn f_survival_matches_quadrature() {
    let mut worst: f64 = 0.0;
    for &x in &[0.05, 0.3, 1.0, 2.5, 7.0, 20.0] {
        for &d1 in &[1.0, 2.0, 3.0, 7.0, 20.0] {
            for &d2 in &[1.0, 4.0, 15.0, 60.0, 500.0] {
                let err = (f_survival(x, d1, d2).unwrap() - f_survival_oracle(x, d1, d2)).abs();
                worst = worst.max(err);
            }
        }
    }
    assert!(worst <= 1e-10, "worst abs error {worst:e}");
}

#[test]
fn t_survival_matches_quadrature() {
    let mut worst: f64 = 0.0;
    for &x in &[-4.0, -1.3, -0.2, 0.4, 1.0, 2.2, 6.0, 15.0] {
        for &df in &[1.0, 1.5, 3.0, 10.0, 45.5, 300.0] {
            let err = (t_survival(x, df).unwrap() - t_survival_oracle(x, df)).abs();
            worst = worst.max(err);
        }
    }
    assert!(worst <= 1e-10, "worst abs error {worst:e}");
}

#[test]
fn survival_is_monotone() {
    let mut prev = 1.0;
    for i in 0..200 {
        let v = f_survival(i as f64 * 0.05, 3.0, 12.0).unwrap();
        assert!(v <= prev && (0.0..=1.0).contains(&v));
        prev = v;
    }
    let mut prev = 1.0;
    for i in -100..100 {
        let v = t_survival(i as f64 * 0.07, 4.5).unwrap();
        assert!(v <= prev && (0.0..=1.0).contains(&v));
        prev = v;
    }
}
