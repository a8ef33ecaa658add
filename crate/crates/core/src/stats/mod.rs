//! Granger causality, Welch t-tests and the F / Student-t tails they need.

mod distributions;
mod granger;
mod ttest;

use thiserror::Error;

pub use distributions::{f_survival, t_survival};
pub use granger::{
    granger_test, granger_test_segments, select_lag_bic, write_causality_csv, CausalityResult,
    GrangerOptions, LagSelection, DEFAULT_ALPHA,
};
pub use ttest::{two_sample_ttest, TTestResult};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("invalid degrees of freedom: {0}")]
    InvalidDof(f64),
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("series too short: {usable} usable samples for lag {lag} (need more than {needed})")]
    SeriesTooShort {
        usable: usize,
        lag: usize,
        needed: usize,
    },
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("lag must be at least 1")]
    InvalidLag,
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("singular design: lagged regressors are collinear")]
    SingularDesign,
    #[error("need at least 2 samples per group, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = StatsError> = std::result::Result<T, E>;
