use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Result, SegmentationError};
use crate::data::{format_float, FeatureMatrix};

/// Pearson correlation matrix with feature names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
    /// Zero-variance columns; their off-diagonal entries are zero.
    pub constant_columns: Vec<usize>,
}

impl CorrelationMatrix {
    /// CSV with a header row and a leading column of feature names.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        let mut header = vec![String::from("feature")];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (i, name) in self.names.iter().enumerate() {
            let mut row = vec![name.clone()];
            row.extend(self.values.row(i).iter().map(|v| format_float(*v)));
            w.write_record(&row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Pearson correlations between all column pairs, accumulated in a single
/// pass over the rows with running means and co-moments.
pub fn correlation_matrix(matrix: &FeatureMatrix) -> Result<CorrelationMatrix> {
    let n = matrix.nrows();
    if n < 2 {
        return Err(SegmentationError::TooFewRows { needed: 2, got: n });
    }
    let p = matrix.ncols();
    let values = matrix.values();
    let mut mean = vec![0.0; p];
    let mut delta = vec![0.0; p];
    let mut comoment = DMatrix::<f64>::zeros(p, p);
    for (i, row) in values.row_iter().enumerate() {
        let count = (i + 1) as f64;
        for j in 0..p {
            delta[j] = row[j] - mean[j];
            mean[j] += delta[j] / count;
        }
        for k in 0..p {
            let after = row[k] - mean[k];
            for j in 0..=k {
                comoment[(j, k)] += delta[j] * after;
            }
        }
    }
    let constant_columns: Vec<usize> = (0..p)
        .filter(|&j| {
            let std = (comoment[(j, j)] / (n - 1) as f64).sqrt();
            std <= 1e-12 * (1.0 + mean[j].abs())
        })
        .collect();
    if !constant_columns.is_empty() {
        log::warn!(
            "correlation: constant column(s) {:?} get zero correlations",
            constant_columns
                .iter()
                .map(|&j| &matrix.column_names()[j])
                .collect::<Vec<_>>()
        );
    }
    let mut corr = DMatrix::<f64>::identity(p, p);
    for k in 0..p {
        for j in 0..k {
            let r = if constant_columns.contains(&j) || constant_columns.contains(&k) {
                0.0
            } else {
                let denom = (comoment[(j, j)] * comoment[(k, k)]).sqrt();
                (comoment[(j, k)] / denom).clamp(-1.0, 1.0)
            };
            corr[(j, k)] = r;
            corr[(k, j)] = r;
        }
    }
    Ok(CorrelationMatrix {
        names: matrix.column_names().to_vec(),
        values: corr,
        constant_columns,
    })
}

/// `trace(A B) / sqrt(trace(A A) trace(B B))`.
pub fn rv_coefficient(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    check_square(a)?;
    check_square(b)?;
    if a.nrows() != b.nrows() {
        return Err(SegmentationError::DimensionMismatch(a.nrows(), b.nrows()));
    }
    let trace_of_product = |x: &DMatrix<f64>, y: &DMatrix<f64>| -> f64 {
        let p = x.nrows();
        let mut t = 0.0;
        for i in 0..p {
            for j in 0..p {
                t += x[(i, j)] * y[(j, i)];
            }
        }
        t
    };
    let aa = trace_of_product(a, a);
    let bb = trace_of_product(b, b);
    if aa <= 0.0 || bb <= 0.0 {
        return Err(SegmentationError::ZeroMatrix);
    }
    Ok(trace_of_product(a, b) / (aa * bb).sqrt())
}

/// Pearson correlation between the strict upper triangles of two matrices.
/// Zero when either triangle is constant.
pub fn pearson_vectorized(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    check_square(a)?;
    check_square(b)?;
    if a.nrows() != b.nrows() {
        return Err(SegmentationError::DimensionMismatch(a.nrows(), b.nrows()));
    }
    let p = a.nrows();
    let pairs: Vec<(f64, f64)> = (0..p)
        .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
        .map(|(i, j)| (a[(i, j)], b[(i, j)]))
        .collect();
    if pairs.len() < 2 {
        return Err(SegmentationError::TooFewRows {
            needed: 2,
            got: pairs.len(),
        });
    }
    let m = pairs.len() as f64;
    let ma = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    let mb = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for &(x, y) in &pairs {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(0.0);
    }
    Ok(sab / (saa * sbb).sqrt())
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(SegmentationError::NotSquare(m.nrows(), m.ncols()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMethod {
    #[default]
    Rv,
    PearsonVectorized,
}

impl SimilarityMethod {
    pub fn similarity(self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
        match self {
            SimilarityMethod::Rv => rv_coefficient(a, b),
            SimilarityMethod::PearsonVectorized => pearson_vectorized(a, b),
        }
    }
}
