use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kmeans::{minibatch_kmeans, KMeansParams};
use super::{check_finite, ClusterError, Result};
use crate::data::format_float;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Silhouette {
    pub mean_score: f64,
    pub per_sample: Vec<f64>,
}

/// Euclidean silhouette. Samples in singleton clusters score 0.
pub fn silhouette(data: &DMatrix<f64>, assignments: &[usize]) -> Result<Silhouette> {
    let n = data.nrows();
    if assignments.len() != n {
        return Err(ClusterError::LengthMismatch {
            expected: n,
            got: assignments.len(),
        });
    }
    if n < 3 {
        return Err(ClusterError::TooFewRows { needed: 3, got: n });
    }
    check_finite(data)?;
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(ClusterError::SingleCluster);
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| data.row(i).iter().copied().collect())
        .collect();

    let per_sample: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = assignments[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for (j, row) in rows.iter().enumerate() {
                let d2: f64 = rows[i]
                    .iter()
                    .zip(row)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                sums[assignments[j]] += d2.sqrt();
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m > 0.0 {
                (b - a) / m
            } else {
                0.0
            }
        })
        .collect();
    let mean_score = per_sample.iter().sum::<f64>() / n as f64;
    Ok(Silhouette {
        mean_score,
        per_sample,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElbowCurve {
    pub ks: Vec<usize>,
    pub inertias: Vec<f64>,
    /// `None` where undefined (k = 1 or k = N).
    pub silhouettes: Vec<Option<f64>>,
    pub suggested_k: usize,
}

impl ElbowCurve {
    /// `k,inertia,silhouette`
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["k", "inertia", "silhouette"])?;
        for ((k, i), s) in self.ks.iter().zip(&self.inertias).zip(&self.silhouettes) {
            w.write_record([
                k.to_string(),
                format_float(*i),
                s.map(format_float).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// k with the highest silhouette, if any is defined.
    pub fn best_silhouette_k(&self) -> Option<usize> {
        self.ks
            .iter()
            .zip(&self.silhouettes)
            .filter_map(|(&k, s)| s.map(|s| (k, s)))
            .fold(None, |best: Option<(usize, f64)>, (k, s)| match best {
                Some((_, bs)) if bs >= s => best,
                _ => Some((k, s)),
            })
            .map(|(k, _)| k)
    }
}

/// Inertia for every k in `k_lo..=k_hi` with the same seed; the suggestion
/// is the interior k maximizing the discrete second difference (ties to the
/// smaller k).
pub fn elbow_curve(
    data: &DMatrix<f64>,
    k_lo: usize,
    k_hi: usize,
    params: &KMeansParams,
    seed: u64,
) -> Result<ElbowCurve> {
    let n = data.nrows();
    if k_lo < 1 || k_hi > n || k_hi < k_lo + 2 {
        return Err(ClusterError::RangeTooNarrow {
            lo: k_lo,
            hi: k_hi,
            n,
        });
    }
    let ks: Vec<usize> = (k_lo..=k_hi).collect();
    let mut inertias = Vec::with_capacity(ks.len());
    let mut silhouettes = Vec::with_capacity(ks.len());
    for &k in &ks {
        let model = minibatch_kmeans(data, k, params, seed)?;
        inertias.push(model.inertia);
        silhouettes.push(match silhouette(data, &model.assignments) {
            Ok(s) if k < n => Some(s.mean_score),
            _ => None,
        });
    }
    let mut suggested_k = ks[1];
    let mut best = f64::NEG_INFINITY;
    for i in 1..ks.len() - 1 {
        let d2 = inertias[i - 1] - 2.0 * inertias[i] + inertias[i + 1];
        if d2 > best {
            best = d2;
            suggested_k = ks[i];
        }
    }
    Ok(ElbowCurve {
        ks,
        inertias,
        silhouettes,
        suggested_k,
    })
}

fn contingency(a: &[usize], b: &[usize]) -> Vec<Vec<u64>> {
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut t = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        t[x][y] += 1;
    }
    t
}

/// Hubert–Arabie adjusted Rand index of two labelings of the same samples.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(ClusterError::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let pairs = |x: u64| (x * x.saturating_sub(1)) as f64 / 2.0;
    let t = contingency(a, b);
    let index: f64 = t.iter().flatten().map(|&x| pairs(x)).sum();
    let rows: f64 = t.iter().map(|r| pairs(r.iter().sum())).sum();
    let cols: f64 = (0..t.first().map_or(0, Vec::len))
        .map(|j| pairs(t.iter().map(|r| r[j]).sum()))
        .sum();
    let total = pairs(a.len() as u64);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = rows * cols / total;
    let max = 0.5 * (rows + cols);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Fraction of samples on the diagonal under the best one-to-one relabeling
/// of `b` onto `a` (exhaustive, so meant for a handful of clusters).
pub fn best_match_accuracy(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(ClusterError::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(1.0);
    }
    let t = contingency(a, b);
    let k = t.len().max(t[0].len());
    let cell = |i: usize, j: usize| t.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0);
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0u64;
    permute(&mut perm, 0, &mut |p| {
        best = best.max((0..k).map(|i| cell(i, p[i])).sum());
    });
    Ok(best as f64 / a.len() as f64)
}

fn permute(p: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, f);
        p.swap(i, j);
    }
}
