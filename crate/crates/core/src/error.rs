use thiserror::Error;

use crate::clustering::ClusterError;
use crate::data::DataError;
use crate::glasso::GlassoError;
use crate::segmentation::SegmentationError;
use crate::stats::StatsError;

/// Umbrella error for callers that chain several stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Glasso(#[from] GlassoError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}
