//! Neighborhood graphical lasso.
//!
//! Every variable is regressed on all the others with an l1 penalty, solved
//! by cyclic coordinate descent on partial residuals. The penalty is picked
//! per vertex from a log-spaced grid by k-fold cross-validation, and the
//! supports of the per-vertex coefficient vectors are combined into an
//! undirected graph.

mod cv;
mod graph;
mod grid;
mod solver;

use thiserror::Error;

use crate::data::DataError;

pub use cv::{cross_validate, CvResult, CvRule};
pub use graph::{graphical_lasso, Edge, GlassoOptions, GraphEstimate, Symmetrization};
pub use grid::{lambda_grid, lambda_max, LambdaGrid, GRID_SIZE, GRID_SPAN};
pub use solver::{
    fit_neighborhood, soft_threshold, CoordinateDescent, NeighborhoodFit, SolverSettings,
};

#[derive(Debug, Error)]
pub enum GlassoError {
    #[error("feature matrix must be standardized")]
    NotStandardized,
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("column {0} is orthogonal to every other column (lambda_max = 0)")]
    DegenerateColumn(usize),
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("need at least 2 columns, got {0}")]
    TooFewColumns(usize),
    #[error("vertex {vertex} out of range for {p} columns")]
    VertexOutOfRange { vertex: usize, p: usize },
    #[error("penalty must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("vertex {vertex} ({name}): {source}")]
    Vertex {
        vertex: usize,
        name: String,
        #[source]
        source: Box<GlassoError>,
    },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = GlassoError> = std::result::Result<T, E>;
