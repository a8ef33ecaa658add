use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::solver::{column, dot};
use super::{GlassoError, Result};
use crate::data::FeatureMatrix;

/// Number of penalties searched per vertex.
pub const GRID_SIZE: usize = 10;
/// `lambda_max / lambda_min`.
pub const GRID_SPAN: f64 = 100.0;

/// Descending, log-spaced penalties from `lambda_max` to `lambda_max / 100`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub values: Vec<f64>,
}

impl LambdaGrid {
    pub fn from_max(lambda_max: f64) -> Self {
        let lambda_min = lambda_max / GRID_SPAN;
        let last = (GRID_SIZE - 1) as f64;
        let mut values: Vec<f64> = (0..GRID_SIZE)
            .map(|i| lambda_max * (1.0 / GRID_SPAN).powf(i as f64 / last))
            .collect();
        values[0] = lambda_max;
        values[GRID_SIZE - 1] = lambda_min;
        LambdaGrid {
            lambda_max,
            lambda_min,
            values,
        }
    }
}

/// `(1/N) max_{j != s} |<Y_j, Y_s>|`: the smallest penalty at which the
/// zero vector solves the lasso for vertex `s`.
pub fn lambda_max(design: &DMatrix<f64>, vertex: usize) -> f64 {
    let n = design.nrows() as f64;
    let target = column(design, vertex);
    (0..design.ncols())
        .filter(|&j| j != vertex)
        .map(|j| (dot(target, column(design, j)) / n).abs())
        .fold(0.0, f64::max)
}

/// Penalty grid for vertex `s` of a standardized matrix.
pub fn lambda_grid(matrix: &FeatureMatrix, vertex: usize) -> Result<LambdaGrid> {
    if !matrix.is_standardized() {
        return Err(GlassoError::NotStandardized);
    }
    let (n, p) = (matrix.nrows(), matrix.ncols());
    if p < 2 {
        return Err(GlassoError::TooFewColumns(p));
    }
    if n < 2 {
        return Err(GlassoError::TooFewRows { needed: 2, got: n });
    }
    if vertex >= p {
        return Err(GlassoError::VertexOutOfRange { vertex, p });
    }
    let lmax = lambda_max(matrix.values(), vertex);
    if lmax == 0.0 || !lmax.is_finite() {
        return Err(GlassoError::DegenerateColumn(vertex));
    }
    Ok(LambdaGrid::from_max(lmax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::standardize;

    #[test]
    fn two_row_example() {
        let design = DMatrix::from_column_slice(2, 3, &[2.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        assert_eq!(lambda_max(&design, 0), 1.0);
        let grid = LambdaGrid::from_max(1.0);
        assert_eq!(grid.lambda_min, 0.01);
        assert_eq!(grid.values[0], 1.0);
        assert_eq!(grid.values[9], 0.01);
    }

    #[test]
    fn log_spacing() {
        for lmax in [1e-4, 0.37, 1.0, 123.0] {
            let g = LambdaGrid::from_max(lmax);
            assert_eq!(g.values.len(), GRID_SIZE);
            assert_eq!(g.lambda_min, lmax / 100.0);
            let ratio = 100f64.powf(1.0 / 9.0);
            assert!((g.values[4] / g.values[5] - ratio).abs() < 1e-12);
            for w in g.values.windows(2) {
                assert!((w[0] / w[1] - ratio).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orthogonal_target_is_degenerate() {
        // columns orthogonal to the first after centering
        let m = FeatureMatrix::from_columns(
            vec!["s".into(), "a".into(), "b".into()],
            &[
                vec![1.0, -1.0, 1.0, -1.0],
                vec![1.0, 1.0, -1.0, -1.0],
                vec![1.0, -1.0, -1.0, 1.0],
            ],
        )
        .unwrap();
        let s = standardize(&m).unwrap();
        assert!(matches!(
            lambda_grid(&s, 0),
            Err(GlassoError::DegenerateColumn(0))
        ));
        assert!(matches!(
            lambda_grid(&m, 0),
            Err(GlassoError::NotStandardized)
        ));
    }
}
