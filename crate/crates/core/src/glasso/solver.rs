use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{GlassoError, Result};
use crate::data::FeatureMatrix;

/// `sign(theta) * max(|theta| - lambda, 0)`.
#[inline]
pub fn soft_threshold(theta: f64, lambda: f64) -> f64 {
    let shrunk = theta.abs() - lambda;
    if shrunk > 0.0 {
        shrunk.copysign(theta)
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Bound on the relative objective decrease of a sweep and on the
    /// curvature-weighted coefficient movement of a sweep.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-6,
            max_sweeps: 1000,
        }
    }
}

/// Result of one neighborhood regression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodFit {
    pub vertex: usize,
    /// Vertex index of every coefficient, ascending, `vertex` excluded.
    pub predictors: Vec<usize>,
    pub beta: Vec<f64>,
    pub lambda: f64,
    /// `(1/2N) |Y_s - Y beta|^2 + lambda |beta|_1`, recomputed from scratch.
    pub loss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective before the first sweep and after every sweep.
    pub objective_trace: Vec<f64>,
}

impl NeighborhoodFit {
    /// Coefficient of vertex `j` (zero for the regressed vertex itself).
    pub fn coefficient(&self, j: usize) -> f64 {
        match self.predictors.binary_search(&j) {
            Ok(k) => self.beta[k],
            Err(_) => 0.0,
        }
    }

    /// Vertices with non-zero coefficients.
    pub fn support(&self) -> Vec<usize> {
        self.predictors
            .iter()
            .zip(&self.beta)
            .filter(|(_, b)| **b != 0.0)
            .map(|(&j, _)| j)
            .collect()
    }

    pub(crate) fn empty(vertex: usize, p: usize) -> Self {
        NeighborhoodFit {
            vertex,
            predictors: (0..p).filter(|&j| j != vertex).collect(),
            beta: vec![0.0; p - 1],
            lambda: 0.0,
            loss: 0.0,
            iterations: 0,
            converged: true,
            objective_trace: Vec::new(),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let k = 4 * i;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn column(design: &DMatrix<f64>, j: usize) -> &[f64] {
    let n = design.nrows();
    &design.as_slice()[j * n..(j + 1) * n]
}

/// Coordinate-descent state for regressing column `s` of a design matrix on
/// the remaining columns.
///
/// The full residual `r = Y_s - sum_j Y_j beta_j` is kept up to date, so a
/// coordinate step costs one inner product and, when the coefficient moves,
/// one axpy: a sweep over all `p - 1` predictors is O(pN).
pub struct CoordinateDescent<'a> {
    design: &'a DMatrix<f64>,
    vertex: usize,
    predictors: Vec<usize>,
    /// `(1/N) |Y_j|^2` per predictor.
    curvature: Vec<f64>,
    beta: Vec<f64>,
    residual: Vec<f64>,
    lambda: f64,
}

impl<'a> CoordinateDescent<'a> {
    pub fn new(design: &'a DMatrix<f64>, vertex: usize, lambda: f64) -> Self {
        let n = design.nrows() as f64;
        let predictors: Vec<usize> = (0..design.ncols()).filter(|&j| j != vertex).collect();
        let curvature = predictors
            .iter()
            .map(|&j| {
                let c = column(design, j);
                dot(c, c) / n
            })
            .collect();
        CoordinateDescent {
            design,
            vertex,
            beta: vec![0.0; predictors.len()],
            predictors,
            curvature,
            residual: column(design, vertex).to_vec(),
            lambda,
        }
    }

    /// Replaces the coefficients (e.g. for a warm start) and rebuilds the
    /// residual.
    pub fn set_beta(&mut self, beta: &[f64]) {
        assert_eq!(beta.len(), self.beta.len(), "coefficient length");
        self.beta.copy_from_slice(beta);
        self.residual = self.fresh_residual();
    }

    pub fn set_lambda(&mut self, lambda: f64) {
        self.lambda = lambda;
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn predictors(&self) -> &[usize] {
        &self.predictors
    }

    fn fresh_residual(&self) -> Vec<f64> {
        let mut r = column(self.design, self.vertex).to_vec();
        for (&j, &b) in self.predictors.iter().zip(&self.beta) {
            if b != 0.0 {
                for (ri, xi) in r.iter_mut().zip(column(self.design, j)) {
                    *ri -= xi * b;
                }
            }
        }
        r
    }

    fn objective_of(&self, residual: &[f64]) -> f64 {
        let n = self.design.nrows() as f64;
        dot(residual, residual) / (2.0 * n)
            + self.lambda * self.beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    /// Objective from the maintained residual.
    pub fn objective(&self) -> f64 {
        self.objective_of(&self.residual)
    }

    /// Objective with the residual recomputed from the coefficients.
    pub fn objective_from_scratch(&self) -> f64 {
        self.objective_of(&self.fresh_residual())
    }

    /// One cyclic pass over all predictors. Returns the curvature-weighted
    /// total coefficient movement `sum_j c_j |delta beta_j|`.
    pub fn sweep(&mut self) -> f64 {
        let n = self.design.nrows() as f64;
        let mut moved = 0.0;
        for k in 0..self.predictors.len() {
            let c = self.curvature[k];
            if c == 0.0 {
                continue;
            }
            let x = column(self.design, self.predictors[k]);
            let old = self.beta[k];
            // (1/N) <r + Y_j beta_j, Y_j>
            let rho = dot(&self.residual, x) / n + c * old;
            let new = soft_threshold(rho, self.lambda) / c;
            let delta = new - old;
            if delta != 0.0 {
                for (ri, xi) in self.residual.iter_mut().zip(x) {
                    *ri -= xi * delta;
                }
                self.beta[k] = new;
                moved += c * delta.abs();
            }
        }
        moved
    }

    /// Sweeps until the relative objective decrease and the weighted
    /// coefficient movement of a sweep both fall below `tol`.
    pub fn run(&mut self, settings: &SolverSettings) -> (usize, bool, Vec<f64>) {
        let mut trace = vec![self.objective()];
        let mut converged = false;
        let mut sweeps = 0;
        while sweeps < settings.max_sweeps {
            let moved = self.sweep();
            sweeps += 1;
            let before = *trace.last().expect("non-empty");
            let after = self.objective();
            trace.push(after);
            let rel = (before - after) / before.abs().max(f64::MIN_POSITIVE);
            if rel < settings.tol && moved < settings.tol {
                converged = true;
                break;
            }
        }
        (sweeps, converged, trace)
    }

    pub(crate) fn into_fit(
        self,
        iterations: usize,
        converged: bool,
        trace: Vec<f64>,
    ) -> NeighborhoodFit {
        let loss = self.objective_from_scratch();
        // -0.0 from the soft threshold reads as 0 everywhere downstream
        let beta = self
            .beta
            .iter()
            .map(|&b| if b == 0.0 { 0.0 } else { b })
            .collect();
        NeighborhoodFit {
            vertex: self.vertex,
            predictors: self.predictors,
            beta,
            lambda: self.lambda,
            loss,
            iterations,
            converged,
            objective_trace: trace,
        }
    }
}

pub(crate) fn check_finite(design: &DMatrix<f64>) -> Result<()> {
    let n = design.nrows();
    match design.as_slice().iter().position(|v| !v.is_finite()) {
        Some(k) => Err(GlassoError::NonFiniteValue {
            row: k % n,
            col: k / n,
        }),
        None => Ok(()),
    }
}

pub(crate) fn solve(
    design: &DMatrix<f64>,
    vertex: usize,
    lambda: f64,
    settings: &SolverSettings,
    warm: Option<&[f64]>,
) -> NeighborhoodFit {
    let mut cd = CoordinateDescent::new(design, vertex, lambda);
    if let Some(beta) = warm {
        cd.set_beta(beta);
    }
    let (iterations, converged, trace) = cd.run(settings);
    cd.into_fit(iterations, converged, trace)
}

/// Lasso regression of column `vertex` on all other columns of a
/// standardized matrix at penalty `lambda`, starting from zero.
pub fn fit_neighborhood(
    matrix: &FeatureMatrix,
    vertex: usize,
    lambda: f64,
    settings: &SolverSettings,
) -> Result<NeighborhoodFit> {
    if !matrix.is_standardized() {
        return Err(GlassoError::NotStandardized);
    }
    let p = matrix.ncols();
    if p < 2 {
        return Err(GlassoError::TooFewColumns(p));
    }
    if vertex >= p {
        return Err(GlassoError::VertexOutOfRange { vertex, p });
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(GlassoError::InvalidLambda(lambda));
    }
    check_finite(matrix.values())?;
    Ok(solve(matrix.values(), vertex, lambda, settings, None))
}
