//! PCA, mini-batch k-means and cluster validation.

mod kmeans;
mod pca;
mod validation;

use thiserror::Error;

pub use kmeans::{minibatch_kmeans, nearest_centroid, ClusterModel, KMeansParams};
pub use pca::{pca_fit, PcaModel, PcaTarget};
pub use validation::{
    adjusted_rand_index, best_match_accuracy, elbow_curve, silhouette, ElbowCurve, Silhouette,
};

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("k = {k} is invalid for {n} samples")]
    KTooLarge { k: usize, n: usize },
    #[error("batch size {batch} is invalid for {n} samples")]
    InvalidBatch { batch: usize, n: usize },
    #[error("invalid PCA target: {0}")]
    InvalidTarget(String),
    #[error("data has zero total variance")]
    ZeroVariance,
    #[error("k range {lo}..={hi} needs at least 3 values inside [1, {n}]")]
    RangeTooNarrow { lo: usize, hi: usize, n: usize },
    #[error("silhouette needs at least two non-empty clusters")]
    SingleCluster,
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = ClusterError> = std::result::Result<T, E>;

pub(crate) fn check_finite(data: &nalgebra::DMatrix<f64>) -> Result<()> {
    for c in 0..data.ncols() {
        for r in 0..data.nrows() {
            if !data[(r, c)].is_finite() {
                return Err(ClusterError::NonFinite { row: r, col: c });
            }
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn sq_dist_row(data: &nalgebra::DMatrix<f64>, row: usize, point: &[f64]) -> f64 {
    let mut s = 0.0;
    for (c, &v) in point.iter().enumerate() {
        let d = data[(row, c)] - v;
        s += d * d;
    }
    s
}
