//! Segmentation analysis for occupant energy-usage data.
//!
//! The crate covers the full analysis chain for per-minute social-game
//! records: ingestion and feature pooling ([`data`]), sparse dependency
//! graphs from neighborhood lasso regressions ([`glasso`]), PCA and
//! mini-batch k-means ([`clustering`]), rank-based classes and
//! cluster labelling ([`segmentation`]), and Granger / Welch tests
//! ([`stats`]).

pub mod clustering;
pub mod data;
pub mod error;
pub mod glasso;
pub mod segmentation;
pub mod stats;

pub use clustering::{ClusterModel, ElbowCurve, KMeansParams, PcaModel, PcaTarget};
pub use data::{
    DatasetTable, FeatureMatrix, FeatureName, FeatureSpec, Granularity, OccupantRecord,
    PerResource, ResourceKind,
};
pub use error::Error;
pub use glasso::{GlassoOptions, GraphEstimate, LambdaGrid, NeighborhoodFit, Symmetrization};
pub use segmentation::{ClassLabel, ClusterLabelling, RankBands};
pub use stats::{CausalityResult, TTestResult};
