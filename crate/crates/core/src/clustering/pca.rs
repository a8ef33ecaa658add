use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{check_finite, ClusterError, Result};

/// Output dimension rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaTarget {
    Dim(usize),
    /// Smallest dimension whose cumulative explained variance reaches the fraction.
    Variance(f64),
}

impl Default for PcaTarget {
    fn default() -> Self {
        PcaTarget::Variance(0.9)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// d × p, orthonormal rows.
    pub components: DMatrix<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub mean: DVector<f64>,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.components.nrows()
    }

    /// N × p → N × d scores.
    pub fn transform(&self, data: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if data.ncols() != self.mean.len() {
            return Err(ClusterError::DimensionMismatch {
                expected: self.mean.len(),
                got: data.ncols(),
            });
        }
        let mut centered = data.clone();
        for mut row in centered.row_iter_mut() {
            row -= self.mean.transpose();
        }
        Ok(centered * self.components.transpose())
    }

    /// N × d scores → N × p reconstruction.
    pub fn inverse_transform(&self, scores: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if scores.ncols() != self.dim() {
            return Err(ClusterError::DimensionMismatch {
                expected: self.dim(),
                got: scores.ncols(),
            });
        }
        let mut out = scores * &self.components;
        for mut row in out.row_iter_mut() {
            row += self.mean.transpose();
        }
        Ok(out)
    }
}

/// Principal directions of the column-centered data.
///
/// Component signs are fixed so that each row's largest-magnitude entry is
/// positive.
pub fn pca_fit(data: &DMatrix<f64>, target: PcaTarget) -> Result<PcaModel> {
    let (n, p) = data.shape();
    if n < 2 {
        return Err(ClusterError::TooFewRows { needed: 2, got: n });
    }
    match target {
        PcaTarget::Dim(d) if d == 0 || d > p => {
            return Err(ClusterError::InvalidTarget(format!(
                "dimension {d} with {p} columns"
            )))
        }
        PcaTarget::Variance(v) if !(v > 0.0 && v <= 1.0) => {
            return Err(ClusterError::InvalidTarget(format!(
                "variance fraction {v}"
            )))
        }
        _ => {}
    }
    check_finite(data)?;

    let mean = DVector::from_iterator(p, data.column_iter().map(|c| c.mean()));
    let mut centered = data.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(ClusterError::ZeroVariance);
    }
    let ratios: Vec<f64> = values.iter().map(|v| v / total).collect();

    let d = match target {
        PcaTarget::Dim(d) => d,
        PcaTarget::Variance(v) => {
            let mut acc = 0.0;
            let mut d = p;
            for (i, r) in ratios.iter().enumerate() {
                acc += r;
                if acc >= v - 1e-12 {
                    d = i + 1;
                    break;
                }
            }
            d
        }
    };

    let mut components = DMatrix::zeros(d, p);
    for (row, &i) in order.iter().take(d).enumerate() {
        let v = eig.eigenvectors.column(i);
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for c in 0..p {
            components[(row, c)] = sign * v[c];
        }
    }
    Ok(PcaModel {
        components,
        explained_variance_ratio: ratios[..d].to_vec(),
        mean,
    })
}
