use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::LambdaGrid;
use super::solver::{check_finite, column, solve, SolverSettings};
use super::{GlassoError, Result};
use crate::data::FeatureMatrix;

/// How the penalty is picked from the cross-validation curve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvRule {
    /// Smallest mean held-out error; exact ties go to the larger penalty.
    MinError,
    /// Largest penalty whose mean error is within one standard error of the
    /// minimum.
    #[default]
    OneStandardError,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_lambda: f64,
    pub best_index: usize,
    /// Mean held-out squared error per grid value.
    pub cv_errors: Vec<f64>,
    /// Standard error of the fold errors per grid value.
    pub cv_std_errors: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
}

/// Fold index sets: seeded shuffle, then contiguous chunks whose sizes
/// differ by at most one.
pub(crate) fn fold_indices(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / folds;
    let extra = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        let mut chunk = idx[start..start + len].to_vec();
        chunk.sort_unstable();
        out.push(chunk);
        start += len;
    }
    out
}

pub(crate) fn cross_validate_design(
    design: &DMatrix<f64>,
    vertex: usize,
    grid: &LambdaGrid,
    folds: usize,
    seed: u64,
    settings: &SolverSettings,
    rule: CvRule,
) -> Result<CvResult> {
    let n = design.nrows();
    if folds < 2 || n < folds {
        return Err(GlassoError::TooFewRows {
            needed: folds.max(2),
            got: n,
        });
    }
    let mut in_test = vec![false; n];
    let mut fold_errors = vec![Vec::with_capacity(folds); grid.values.len()];
    for test in fold_indices(n, folds, seed) {
        in_test.iter_mut().for_each(|t| *t = false);
        test.iter().for_each(|&i| in_test[i] = true);
        let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
        let train_design = design.select_rows(train.iter());
        let target = column(design, vertex);

        let mut warm: Option<Vec<f64>> = None;
        for (g, &lambda) in grid.values.iter().enumerate() {
            let fit = solve(&train_design, vertex, lambda, settings, warm.as_deref());
            let mut sse = 0.0;
            for &i in &test {
                let mut pred = 0.0;
                for (&j, &b) in fit.predictors.iter().zip(&fit.beta) {
                    if b != 0.0 {
                        pred += design[(i, j)] * b;
                    }
                }
                let e = target[i] - pred;
                sse += e * e;
            }
            fold_errors[g].push(sse / test.len() as f64);
            warm = Some(fit.beta);
        }
    }

    let k = folds as f64;
    let cv_errors: Vec<f64> = fold_errors
        .iter()
        .map(|e| e.iter().sum::<f64>() / k)
        .collect();
    let cv_std_errors: Vec<f64> = fold_errors
        .iter()
        .zip(&cv_errors)
        .map(|(e, &m)| {
            let var = e.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        })
        .collect();

    // grid is descending, so scanning forward with strict comparison keeps
    // the larger penalty on ties
    let mut best_min = 0;
    for g in 1..cv_errors.len() {
        if cv_errors[g] < cv_errors[best_min] {
            best_min = g;
        }
    }
    let best_index = match rule {
        CvRule::MinError => best_min,
        CvRule::OneStandardError => {
            let cutoff = cv_errors[best_min] + cv_std_errors[best_min];
            (0..=best_min)
                .find(|&g| cv_errors[g] <= cutoff)
                .unwrap_or(best_min)
        }
    };
    Ok(CvResult {
        best_lambda: grid.values[best_index],
        best_index,
        cv_errors,
        cv_std_errors,
        folds,
        seed,
    })
}

/// K-fold cross-validation of the penalty for vertex `s` over `grid`.
///
/// Each fold fits the whole grid on the training rows with warm starts from
/// the previous (larger) penalty and scores the mean squared prediction
/// error on the held-out rows.
pub fn cross_validate(
    matrix: &FeatureMatrix,
    vertex: usize,
    grid: &LambdaGrid,
    folds: usize,
    seed: u64,
    settings: &SolverSettings,
    rule: CvRule,
) -> Result<CvResult> {
    if !matrix.is_standardized() {
        return Err(GlassoError::NotStandardized);
    }
    let p = matrix.ncols();
    if vertex >= p {
        return Err(GlassoError::VertexOutOfRange { vertex, p });
    }
    check_finite(matrix.values())?;
    cross_validate_design(matrix.values(), vertex, grid, folds, seed, settings, rule)
}
