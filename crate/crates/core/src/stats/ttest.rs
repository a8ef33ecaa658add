use serde::{Deserialize, Serialize};

use super::distributions::t_survival;
use super::{Result, StatsError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub mean_before: f64,
    pub mean_after: f64,
    pub t_statistic: f64,
    /// Welch–Satterthwaite.
    pub degrees_of_freedom: f64,
    /// Two-sided.
    pub p_value: f64,
    /// `100·(before − after)/before`; `None` unless the before mean is positive.
    pub percent_drop: Option<f64>,
}

fn mean_var(s: &[f64]) -> (f64, f64) {
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let var = s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch's unequal-variance two-sample t-test.
pub fn two_sample_ttest(before: &[f64], after: &[f64]) -> Result<TTestResult> {
    for s in [before, after] {
        if s.len() < 2 {
            return Err(StatsError::TooFewSamples(s.len()));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite("sample".into()));
        }
    }
    let (m1, v1) = mean_var(before);
    let (m2, v2) = mean_var(after);
    let (n1, n2) = (before.len() as f64, after.len() as f64);
    let (a, b) = (v1 / n1, v2 / n2);
    let se = (a + b).sqrt();
    let diff = m1 - m2;
    let (t, df) = if se > 0.0 {
        let df = (a + b).powi(2) / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0));
        (diff / se, df)
    } else {
        let t = if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        (t, n1 + n2 - 2.0)
    };
    let p_value = (2.0 * t_survival(t.abs(), df.max(1.0))?).min(1.0);
    Ok(TTestResult {
        mean_before: m1,
        mean_after: m2,
        t_statistic: t,
        degrees_of_freedom: df,
        p_value,
        percent_drop: (m1 > 0.0).then(|| 100.0 * diff / m1),
    })
}
