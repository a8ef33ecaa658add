use std::fmt;
use std::path::PathBuf;

use gameseg_core::clustering::ClusterError;
use gameseg_core::data::DataError;
use gameseg_core::glasso::GlassoError;
use gameseg_core::segmentation::SegmentationError;
use gameseg_core::stats::StatsError;
use thiserror::Error;

/// Pipeline stage an error is attributed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Config,
    Synth,
    Ingest,
    Segment,
    Glasso,
    Causality,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Synth => "synth",
            Stage::Ingest => "ingest",
            Stage::Segment => "segment",
            Stage::Glasso => "glasso",
            Stage::Causality => "causality",
            Stage::Report => "report",
        })
    }
}

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
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
    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Serialize(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Serialize(e.to_string())
    }
}

pub mod exit_code {
    pub const CONFIG: i32 = 3;
    pub const IO: i32 = 4;
    pub const DATA: i32 = 5;
    pub const GLASSO: i32 = 6;
    pub const CLUSTER: i32 = 7;
    pub const SEGMENTATION: i32 = 8;
    pub const STATS: i32 = 9;
    pub const SERIALIZE: i32 = 10;
}

#[derive(Debug, Error)]
#[error("stage `{stage}`, operation `{operation}`: {failure}")]
pub struct CliError {
    pub stage: Stage,
    pub operation: &'static str,
    #[source]
    pub failure: Failure,
}

impl CliError {
    pub fn new(stage: Stage, operation: &'static str, failure: Failure) -> Self {
        CliError {
            stage,
            operation,
            failure,
        }
    }

    /// Process exit status for this error's family. Invalid configuration
    /// maps to the config code whichever module noticed it.
    pub fn exit_code(&self) -> i32 {
        use exit_code::*;
        match &self.failure {
            Failure::Config(_) | Failure::Data(DataError::InvalidConfig(_)) => CONFIG,
            Failure::Io { .. } => IO,
            Failure::Data(DataError::Csv(e)) if e.is_io_error() => IO,
            Failure::Data(_) => DATA,
            Failure::Glasso(_) => GLASSO,
            Failure::Cluster(_) => CLUSTER,
            Failure::Segmentation(_) => SEGMENTATION,
            Failure::Stats(_) => STATS,
            Failure::Serialize(_) => SERIALIZE,
        }
    }
}

/// Attaches stage and operation to a failing result.
pub trait Attribute<T> {
    fn at(self, stage: Stage, operation: &'static str) -> Result<T, CliError>;
}

impl<T, E: Into<Failure>> Attribute<T> for Result<T, E> {
    fn at(self, stage: Stage, operation: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::new(stage, operation, e.into()))
    }
}
