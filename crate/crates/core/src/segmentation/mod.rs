//! Rank-based supervised classes, feature correlation matrices, and
//! matching of unsupervised clusters to classes.

mod classes;
mod correlation;
mod labelling;

use thiserror::Error;

pub use classes::{
    assign_classes, assign_classes_from_records, ClassAssignment, ClassLabel, RankBands,
    RankOrientation,
};
pub use correlation::{
    correlation_matrix, pearson_vectorized, rv_coefficient, CorrelationMatrix, SimilarityMethod,
};
pub use labelling::{
    decile_edges, label_clusters, proportion_buckets, BucketCount, ClusterLabelling,
    PlayerProportions, ProportionReport,
};

#[derive(Debug, Error)]
pub enum SegmentationError {
    #[error("record for player {player} at {timestamp} has no rank")]
    MissingRank { player: String, timestamp: String },
    #[error("no players to classify")]
    NoPlayers,
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("matrix dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix has zero norm")]
    ZeroMatrix,
    #[error("feature order differs between correlation matrices")]
    FeatureOrderMismatch,
    #[error("expected {expected} matrices, got {got}")]
    GroupCount { expected: usize, got: usize },
    #[error("bucket edges must be finite, strictly increasing and at least two: {0:?}")]
    EmptyBuckets(Vec<f64>),
    #[error("player {0} has no class")]
    UnknownPlayer(String),
    #[error("{0}")]
    Shape(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = SegmentationError> = std::result::Result<T, E>;
