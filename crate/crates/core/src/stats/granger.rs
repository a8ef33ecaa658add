use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::distributions::f_survival;
use super::{Result, StatsError};
use crate::data::format_float;

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Relative pivot size below which a lagged regressor counts as collinear.
const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrangerOptions {
    pub lag: usize,
    pub alpha: f64,
    /// Test first differences instead of levels.
    pub difference: bool,
}

impl Default for GrangerOptions {
    fn default() -> Self {
        GrangerOptions {
            lag: 1,
            alpha: DEFAULT_ALPHA,
            difference: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalityResult {
    pub cause: String,
    pub effect: String,
    pub lag: usize,
    pub f_statistic: f64,
    pub p_value: f64,
    pub reject_h0: bool,
    pub alpha: f64,
    pub n_effective: usize,
    /// Set when the regression was singular; statistic and p-value are then placeholders.
    pub inconclusive: bool,
}

impl CausalityResult {
    pub fn named(mut self, cause: impl Into<String>, effect: impl Into<String>) -> Self {
        self.cause = cause.into();
        self.effect = effect.into();
        self
    }

    /// Placeholder row for a pair whose design was singular.
    pub fn inconclusive(lag: usize, alpha: f64, n_effective: usize) -> Self {
        CausalityResult {
            cause: String::new(),
            effect: String::new(),
            lag,
            f_statistic: 0.0,
            p_value: 1.0,
            reject_h0: false,
            alpha,
            n_effective,
            inconclusive: true,
        }
    }

    /// p-value as printed in tables: below 5e-4 shows as "0".
    pub fn p_display(&self) -> String {
        if self.inconclusive {
            "inconclusive".into()
        } else if self.p_value < 5e-4 {
            "0".into()
        } else {
            format!("{:.3}", self.p_value)
        }
    }
}

/// `player_type,cause,effect,lag,p_value,f_statistic,reject,p_display`
pub fn write_causality_csv<W: Write>(rows: &[(String, CausalityResult)], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "player_type",
        "cause",
        "effect",
        "lag",
        "p_value",
        "f_statistic",
        "reject",
        "p_display",
    ])?;
    for (group, r) in rows {
        let (p, f) = if r.inconclusive {
            (String::new(), String::new())
        } else {
            (format_float(r.p_value), format_float(r.f_statistic))
        };
        w.write_record([
            group.clone(),
            r.cause.clone(),
            r.effect.clone(),
            r.lag.to_string(),
            p,
            f,
            r.reject_h0.to_string(),
            r.p_display(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Residual sum of squares of the least-squares fit, or `SingularDesign`.
fn ols_rss(design: &DMatrix<f64>, y: &DVector<f64>) -> Result<f64> {
    let qr = design.clone().qr();
    let r = qr.r();
    for j in 0..design.ncols() {
        let norm = design.column(j).norm();
        if norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * norm {
            return Err(StatsError::SingularDesign);
        }
    }
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(StatsError::SingularDesign)?;
    Ok((y - design * beta).norm_squared())
}

struct Lagged {
    target: DVector<f64>,
    restricted: DMatrix<f64>,
    unrestricted: DMatrix<f64>,
}

fn difference(s: &[f64]) -> Vec<f64> {
    s.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Stacks lagged rows from every segment; the first `skip` targets of each
/// segment are dropped so no row mixes samples across segment boundaries.
fn build_lagged(segments: &[(Vec<f64>, Vec<f64>)], lag: usize, skip: usize) -> Lagged {
    let n: usize = segments
        .iter()
        .map(|(_, y)| y.len().saturating_sub(skip))
        .sum();
    let mut target = DVector::zeros(n);
    let mut restricted = DMatrix::zeros(n, 1 + lag);
    let mut unrestricted = DMatrix::zeros(n, 1 + 2 * lag);
    let mut row = 0;
    for (x, y) in segments {
        for t in skip..y.len() {
            target[row] = y[t];
            restricted[(row, 0)] = 1.0;
            unrestricted[(row, 0)] = 1.0;
            for l in 1..=lag {
                restricted[(row, l)] = y[t - l];
                unrestricted[(row, l)] = y[t - l];
                unrestricted[(row, lag + l)] = x[t - l];
            }
            row += 1;
        }
    }
    Lagged {
        target,
        restricted,
        unrestricted,
    }
}

fn prepare(
    segments: &[(&[f64], &[f64])],
    options: &GrangerOptions,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    if options.lag == 0 {
        return Err(StatsError::InvalidLag);
    }
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(options.alpha));
    }
    segments
        .iter()
        .map(|&(x, y)| {
            if x.len() != y.len() {
                return Err(StatsError::LengthMismatch(x.len(), y.len()));
            }
            if x.iter().chain(y).any(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite("series".into()));
            }
            Ok(if options.difference {
                (difference(x), difference(y))
            } else {
                (x.to_vec(), y.to_vec())
            })
        })
        .collect()
}

fn test_prepared(
    segments: &[(Vec<f64>, Vec<f64>)],
    lag: usize,
    alpha: f64,
) -> Result<CausalityResult> {
    let data = build_lagged(segments, lag, lag);
    let n = data.target.len();
    let needed = 2 * lag + 1;
    if n <= needed {
        return Err(StatsError::SeriesTooShort {
            usable: n,
            lag,
            needed,
        });
    }
    let rss_r = ols_rss(&data.restricted, &data.target)?;
    let rss_u = ols_rss(&data.unrestricted, &data.target)?;
    let dof = (n - needed) as f64;
    let gain = (rss_r - rss_u).max(0.0);
    let f_statistic = if rss_u > 0.0 {
        (gain / lag as f64) / (rss_u / dof)
    } else if gain > 0.0 {
        f64::INFINITY
    } else {
        // Both models fit exactly: nothing to test.
        return Err(StatsError::SingularDesign);
    };
    let p_value = f_survival(f_statistic, lag as f64, dof)?;
    Ok(CausalityResult {
        cause: String::new(),
        effect: String::new(),
        lag,
        f_statistic,
        p_value,
        reject_h0: p_value < alpha,
        alpha,
        n_effective: n,
        inconclusive: false,
    })
}

/// F-test of "x does not Granger-cause y" with `lag` lags of both series.
pub fn granger_test(x: &[f64], y: &[f64], lag: usize, alpha: f64) -> Result<CausalityResult> {
    let options = GrangerOptions {
        lag,
        alpha,
        difference: false,
    };
    granger_test_segments(&[(x, y)], &options)
}

/// Granger test pooled over independent segments (for example one per
/// player-day); lags never reach across a segment boundary.
pub fn granger_test_segments(
    segments: &[(&[f64], &[f64])],
    options: &GrangerOptions,
) -> Result<CausalityResult> {
    let prepared = prepare(segments, options)?;
    test_prepared(&prepared, options.lag, options.alpha)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LagSelection {
    pub lags: Vec<usize>,
    pub bic: Vec<f64>,
    pub best_lag: usize,
}

/// BIC of the unrestricted model for lags `1..=max_lag`, all evaluated on
/// the same rows (the first `max_lag` of each segment dropped).
pub fn select_lag_bic(
    segments: &[(&[f64], &[f64])],
    max_lag: usize,
    difference: bool,
) -> Result<LagSelection> {
    let options = GrangerOptions {
        lag: max_lag,
        alpha: DEFAULT_ALPHA,
        difference,
    };
    let prepared = prepare(segments, &options)?;
    let mut lags = Vec::new();
    let mut bic = Vec::new();
    for lag in 1..=max_lag {
        let data = build_lagged(&prepared, lag, max_lag);
        let n = data.target.len();
        let k = data.unrestricted.ncols();
        if n <= k + 1 {
            return Err(StatsError::SeriesTooShort {
                usable: n,
                lag,
                needed: k + 1,
            });
        }
        let rss = ols_rss(&data.unrestricted, &data.target)?;
        let nf = n as f64;
        lags.push(lag);
        bic.push(nf * (rss.max(f64::MIN_POSITIVE) / nf).ln() + k as f64 * nf.ln());
    }
    let best = bic
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v < bic[b] { i } else { b });
    Ok(LagSelection {
        best_lag: lags[best],
        lags,
        bic,
    })
}
