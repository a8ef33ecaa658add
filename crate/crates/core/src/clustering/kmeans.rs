use std::cmp::Ordering;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_finite, sq_dist_row, ClusterError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansParams {
    /// `None` means `min(256, N)`.
    pub batch_size: Option<usize>,
    pub max_iters: usize,
    pub n_init: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            batch_size: None,
            max_iters: 200,
            n_init: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    /// k rows of length d.
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub seed: u64,
}

impl ClusterModel {
    pub fn centroid_matrix(&self) -> DMatrix<f64> {
        let d = self.centroids.first().map_or(0, Vec::len);
        DMatrix::from_fn(self.k, d, |r, c| self.centroids[r][c])
    }

    /// Sum of squared distances from each row to its assigned centroid.
    pub fn recompute_inertia(&self, data: &DMatrix<f64>) -> f64 {
        self.assignments
            .iter()
            .enumerate()
            .map(|(i, &c)| sq_dist_row(data, i, &self.centroids[c]))
            .sum()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Index of the closest centroid and the squared distance; ties go to the lower index.
pub fn nearest_centroid(data: &DMatrix<f64>, row: usize, centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist_row(data, row, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn lex_cmp(data: &DMatrix<f64>, a: usize, b: usize) -> Ordering {
    for c in 0..data.ncols() {
        match data[(a, c)].total_cmp(&data[(b, c)]) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn kmeans_pp(data: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.nrows();
    let row = |i: usize| data.row(i).iter().copied().collect::<Vec<f64>>();
    let mut centroids = vec![row(rng.random_range(0..n))];
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist_row(data, i, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            // Rounding can land on a zero-weight tail row; step back to a positive one.
            while d2[pick] == 0.0 && pick > 0 {
                pick -= 1;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        let c = row(pick);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist_row(data, i, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn assign_all(data: &DMatrix<f64>, centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let pairs: Vec<(usize, f64)> = (0..data.nrows())
        .into_par_iter()
        .map(|i| nearest_centroid(data, i, centroids))
        .collect();
    let inertia = pairs.iter().map(|p| p.1).sum();
    (pairs.into_iter().map(|p| p.0).collect(), inertia)
}

fn single_run(
    data: &DMatrix<f64>,
    k: usize,
    batch: usize,
    max_iters: usize,
    seed: u64,
    stream: u64,
) -> (Vec<Vec<f64>>, Vec<usize>, f64) {
    let n = data.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut centroids = kmeans_pp(data, k, &mut rng);
    let mut counts = vec![0usize; k];
    let mut batch_rows = vec![0usize; batch];
    let mut batch_labels = vec![0usize; batch];
    for _ in 0..max_iters {
        for r in batch_rows.iter_mut() {
            *r = rng.random_range(0..n);
        }
        for (label, &r) in batch_labels.iter_mut().zip(&batch_rows) {
            *label = nearest_centroid(data, r, &centroids).0;
        }
        for (&r, &c) in batch_rows.iter().zip(&batch_labels) {
            counts[c] += 1;
            let eta = 1.0 / counts[c] as f64;
            for (j, v) in centroids[c].iter_mut().enumerate() {
                *v += eta * (data[(r, j)] - *v);
            }
        }
    }
    // Move each non-empty centroid to its members' mean, then do the final full assignment.
    let (labels, _) = assign_all(data, &centroids);
    let mut sums = vec![vec![0.0; data.ncols()]; k];
    let mut sizes = vec![0usize; k];
    for (i, &c) in labels.iter().enumerate() {
        sizes[c] += 1;
        for (j, s) in sums[c].iter_mut().enumerate() {
            *s += data[(i, j)];
        }
    }
    for ((centroid, sum), &size) in centroids.iter_mut().zip(sums).zip(&sizes) {
        if size > 0 {
            *centroid = sum.into_iter().map(|s| s / size as f64).collect();
        }
    }
    let (assignments, inertia) = assign_all(data, &centroids);
    (centroids, assignments, inertia)
}

/// Mini-batch k-means with k-means++ seeding, best of `n_init` restarts.
///
/// Rows are sorted lexicographically before any random draw, so the fitted
/// centroids do not depend on input row order and the returned assignments
/// permute with the rows.
pub fn minibatch_kmeans(
    data: &DMatrix<f64>,
    k: usize,
    params: &KMeansParams,
    seed: u64,
) -> Result<ClusterModel> {
    let n = data.nrows();
    if k == 0 || k > n {
        return Err(ClusterError::KTooLarge { k, n });
    }
    let batch = params.batch_size.unwrap_or_else(|| n.min(256));
    if batch == 0 || batch > n {
        return Err(ClusterError::InvalidBatch { batch, n });
    }
    check_finite(data)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lex_cmp(data, a, b));
    let sorted = data.select_rows(&order);

    let runs: Vec<_> = (0..params.n_init.max(1) as u64)
        .into_par_iter()
        .map(|s| single_run(&sorted, k, batch, params.max_iters, seed, s))
        .collect();
    let (centroids, sorted_assign, inertia) = runs
        .into_iter()
        .reduce(|best, run| if run.2 < best.2 { run } else { best })
        .expect("n_init >= 1");

    let mut assignments = vec![0; n];
    for (pos, &orig) in order.iter().enumerate() {
        assignments[orig] = sorted_assign[pos];
    }
    Ok(ClusterModel {
        k,
        centroids,
        assignments,
        inertia,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_groups() -> DMatrix<f64> {
        let pts = [
            [0.0, 0.0],
            [0.5, 0.0],
            [0.0, 0.5],
            [10.0, 10.0],
            [10.5, 10.0],
            [10.0, 10.5],
        ];
        DMatrix::from_fn(6, 2, |r, c| pts[r][c])
    }

    #[test]
    fn separates_two_groups() {
        let data = two_groups();
        let m = minibatch_kmeans(&data, 2, &KMeansParams::default(), 3).unwrap();
        let a = &m.assignments;
        assert!(a[0] == a[1] && a[1] == a[2]);
        assert!(a[3] == a[4] && a[4] == a[5]);
        assert_ne!(a[0], a[3]);
        // Each group has within-group sum of squares 1/6 + 1/6 + ... computed directly.
        let wss: f64 = [0usize, 3]
            .iter()
            .map(|&s| {
                let mx = (0..3).map(|i| data[(s + i, 0)]).sum::<f64>() / 3.0;
                let my = (0..3).map(|i| data[(s + i, 1)]).sum::<f64>() / 3.0;
                (0..3)
                    .map(|i| (data[(s + i, 0)] - mx).powi(2) + (data[(s + i, 1)] - my).powi(2))
                    .sum::<f64>()
            })
            .sum();
        assert!((m.inertia - wss).abs() < 1e-9, "{} vs {}", m.inertia, wss);
    }

    #[test]
    fn k_equals_n_gives_zero_inertia() {
        let data = two_groups();
        let m = minibatch_kmeans(&data, 6, &KMeansParams::default(), 1).unwrap();
        assert_eq!(m.inertia, 0.0);
    }

    #[test]
    fn rejects_large_k() {
        let data = two_groups();
        assert!(matches!(
            minibatch_kmeans(&data, 7, &KMeansParams::default(), 1),
            Err(ClusterError::KTooLarge { k: 7, n: 6 })
        ));
    }

    #[test]
    fn stored_inertia_matches_recompute() {
        let data = DMatrix::from_fn(50, 3, |r, c| ((r * 7 + c * 13) % 11) as f64);
        let m = minibatch_kmeans(&data, 4, &KMeansParams::default(), 9).unwrap();
        let re = m.recompute_inertia(&data);
        assert!((re - m.inertia).abs() <= 1e-6 * re.max(1.0));
    }
}
