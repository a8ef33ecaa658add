use std::io::Write;

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::cv::{cross_validate_design, CvResult, CvRule};
use super::grid::{lambda_max, LambdaGrid};
use super::solver::{check_finite, solve, NeighborhoodFit, SolverSettings};
use super::{GlassoError, Result};
use crate::data::{format_float, standardize, FeatureMatrix};

/// Rule for turning per-vertex neighborhoods into undirected edges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetrization {
    /// Edge when either endpoint selects the other.
    #[default]
    Or,
    /// Edge when both endpoints select each other.
    And,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlassoOptions {
    pub symmetrization: Symmetrization,
    pub tol: f64,
    pub max_sweeps: usize,
    pub folds: usize,
    pub parallel: bool,
    pub seed: u64,
    pub cv_rule: CvRule,
}

impl Default for GlassoOptions {
    fn default() -> Self {
        let solver = SolverSettings::default();
        GlassoOptions {
            symmetrization: Symmetrization::Or,
            tol: solver.tol,
            max_sweeps: solver.max_sweeps,
            folds: 5,
            parallel: true,
            seed: 0,
            cv_rule: CvRule::default(),
        }
    }
}

impl GlassoOptions {
    pub fn solver(&self) -> SolverSettings {
        SolverSettings {
            tol: self.tol,
            max_sweeps: self.max_sweeps,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// Signed strength taken from the two regression coefficients.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEstimate {
    pub vertex_names: Vec<String>,
    /// `a < b`, sorted.
    pub edges: Vec<Edge>,
    pub per_vertex_fits: Vec<NeighborhoodFit>,
    /// Per vertex; `None` when the vertex was degenerate.
    pub cv: Vec<Option<CvResult>>,
    /// Symmetric, zero diagonal, zero off the edge set.
    pub partial_correlations: DMatrix<f64>,
    pub symmetrization: Symmetrization,
    pub seed: u64,
    pub warnings: Vec<String>,
}

/// Per-vertex CV seed; independent of evaluation order.
fn vertex_seed(seed: u64, vertex: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(vertex as u64);
    rng.next_u64()
}

fn fit_vertex(
    design: &DMatrix<f64>,
    vertex: usize,
    options: &GlassoOptions,
) -> Result<(NeighborhoodFit, Option<CvResult>, Option<String>)> {
    let p = design.ncols();
    let lmax = lambda_max(design, vertex);
    if lmax == 0.0 {
        let msg = format!("vertex {vertex}: lambda_max = 0, neighborhood left empty");
        log::warn!("{msg}");
        return Ok((NeighborhoodFit::empty(vertex, p), None, Some(msg)));
    }
    let grid = LambdaGrid::from_max(lmax);
    let settings = options.solver();
    let cv = cross_validate_design(
        design,
        vertex,
        &grid,
        options.folds,
        vertex_seed(options.seed, vertex),
        &settings,
        options.cv_rule,
    )?;
    let fit = solve(design, vertex, cv.best_lambda, &settings, None);
    Ok((fit, Some(cv), None))
}

/// Larger-magnitude coefficient for OR, smaller for AND; ties keep `first`.
fn edge_value(first: f64, second: f64, rule: Symmetrization) -> f64 {
    let pick_second = match rule {
        Symmetrization::Or => second.abs() > first.abs(),
        Symmetrization::And => second.abs() < first.abs(),
    };
    if pick_second {
        second
    } else {
        first
    }
}

impl GraphEstimate {
    /// Edges implied by the stored fits under `rule`.
    pub fn edges_under(&self, rule: Symmetrization) -> Vec<Edge> {
        let p = self.vertex_names.len();
        let mut edges = Vec::new();
        for a in 0..p {
            for b in a + 1..p {
                let ab = self.per_vertex_fits[a].coefficient(b);
                let ba = self.per_vertex_fits[b].coefficient(a);
                let present = match rule {
                    Symmetrization::Or => ab != 0.0 || ba != 0.0,
                    Symmetrization::And => ab != 0.0 && ba != 0.0,
                };
                if present {
                    edges.push(Edge {
                        a,
                        b,
                        value: edge_value(ab, ba, rule),
                    });
                }
            }
        }
        edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.edges.iter().any(|e| e.a == a && e.b == b)
    }

    pub fn lambda_per_vertex(&self) -> Vec<f64> {
        self.per_vertex_fits.iter().map(|f| f.lambda).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| {
                json!({
                    "a": self.vertex_names[e.a],
                    "b": self.vertex_names[e.b],
                    "weight": e.value.abs(),
                    "sign": if e.value < 0.0 { -1 } else { 1 },
                })
            })
            .collect();
        json!({
            "vertices": self.vertex_names,
            "edges": edges,
            "lambda_per_vertex": self.lambda_per_vertex(),
            "symmetrization": self.symmetrization,
            "seed": self.seed,
        })
    }

    pub fn write_json<W: Write>(&self, sink: W) -> Result<()> {
        serde_json::to_writer_pretty(sink, &self.to_json())?;
        Ok(())
    }

    /// `a,b,weight,sign`
    pub fn write_edges_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["a", "b", "weight", "sign"])?;
        for e in &self.edges {
            w.write_record([
                self.vertex_names[e.a].clone(),
                self.vertex_names[e.b].clone(),
                format_float(e.value.abs()),
                if e.value < 0.0 { "-1" } else { "1" }.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Estimates the dependency graph of the matrix columns.
///
/// Unstandardized input is standardized first. For every vertex the
/// penalty grid is built, a penalty is chosen by cross-validation and the
/// lasso is refit on all rows at that penalty. Vertices are independent and
/// run concurrently when `options.parallel` is set; results do not depend on
/// scheduling.
pub fn graphical_lasso(matrix: &FeatureMatrix, options: &GlassoOptions) -> Result<GraphEstimate> {
    let standardized;
    let matrix = if matrix.is_standardized() {
        matrix
    } else {
        standardized = standardize(matrix)?;
        &standardized
    };
    let (n, p) = (matrix.nrows(), matrix.ncols());
    if p < 2 {
        return Err(GlassoError::TooFewColumns(p));
    }
    if options.folds < 2 || n < options.folds {
        return Err(GlassoError::TooFewRows {
            needed: options.folds.max(2),
            got: n,
        });
    }
    check_finite(matrix.values())?;
    let design = matrix.values();

    let run = |s: usize| {
        fit_vertex(design, s, options).map_err(|e| GlassoError::Vertex {
            vertex: s,
            name: matrix.column_names()[s].clone(),
            source: Box::new(e),
        })
    };
    let results: Vec<_> = if options.parallel {
        (0..p).into_par_iter().map(run).collect::<Result<_>>()?
    } else {
        (0..p).map(run).collect::<Result<_>>()?
    };

    let mut per_vertex_fits = Vec::with_capacity(p);
    let mut cv = Vec::with_capacity(p);
    let mut warnings: Vec<String> = matrix
        .constant_columns()
        .iter()
        .map(|&j| format!("column {} is constant", matrix.column_names()[j]))
        .collect();
    for (fit, cv_result, warning) in results {
        per_vertex_fits.push(fit);
        cv.push(cv_result);
        warnings.extend(warning);
    }

    let mut graph = GraphEstimate {
        vertex_names: matrix.column_names().to_vec(),
        edges: Vec::new(),
        per_vertex_fits,
        cv,
        partial_correlations: DMatrix::zeros(p, p),
        symmetrization: options.symmetrization,
        seed: options.seed,
        warnings,
    };
    graph.edges = graph.edges_under(options.symmetrization);
    for e in &graph.edges {
        graph.partial_correlations[(e.a, e.b)] = e.value;
        graph.partial_correlations[(e.b, e.a)] = e.value;
    }
    Ok(graph)
}
