//! Social-game record schema, CSV ingestion, points, feature pooling and
//! the synthetic data generator.

mod csv_io;
mod features;
mod points;
mod record;
mod synth;

use thiserror::Error;

pub use csv_io::{
    format_float, ingest_csv, write_csv, CsvSchema, IngestReport, Ingested, RecordField,
};
pub use features::{
    paired_day_series, pool_features, standardize, ColumnScaling, FeatureMatrix, FeatureName,
    FeatureSpec, Granularity, RowKey,
};
pub use points::{compute_points, PointsConfig};
pub use record::{
    CalendarFlag, CalendarFlags, DatasetTable, OccupantRecord, PerResource, ResourceKind,
    SCHEMA_VERSION,
};
pub use synth::{generate_synthetic, SynthConfig, SyntheticDataset};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing column(s) in CSV header: {}", .0.join(", "))]
    MissingColumn(Vec<String>),
    #[error("{malformed} of {total} rows are malformed; first problem: {first}")]
    Parse {
        malformed: usize,
        total: usize,
        first: String,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("baseline must be positive, got {0}")]
    NonPositiveBaseline(f64),
    #[error("points booster must be positive, got {0}")]
    NonPositiveBooster(f64),
    #[error("usage must be non-negative and finite, got {0}")]
    InvalidUsage(f64),
    #[error("table is empty")]
    EmptyTable,
    #[error("unknown feature name `{0}`")]
    UnknownFeatureName(String),
    #[error("record for player {player} at {timestamp} has no rank")]
    MissingRank { player: String, timestamp: String },
    #[error("matrix is already standardized")]
    AlreadyStandardized,
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = DataError> = std::result::Result<T, E>;
