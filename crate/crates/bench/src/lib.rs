//! Seeded inputs shared by the benchmarks.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng))
}

/// Columns of an AR(1) chain, so neighbors are correlated.
pub fn chain(n: usize, p: usize, rho: f64, seed: u64) -> DMatrix<f64> {
    let mut m = gaussian(n, p, seed);
    let scale = (1.0 - rho * rho).sqrt();
    for i in 0..n {
        for j in 1..p {
            m[(i, j)] = rho * m[(i, j - 1)] + scale * m[(i, j)];
        }
    }
    m
}

/// `k` well-separated blobs of `per` points each in `dim` dimensions.
pub fn blobs(k: usize, per: usize, dim: usize, seed: u64) -> DMatrix<f64> {
    let mut m = gaussian(k * per, dim, seed);
    for i in 0..k * per {
        m[(i, (i / per) % dim)] += 10.0 * (i / per) as f64;
    }
    m
}

pub fn series(n: usize, seed: u64) -> Vec<f64> {
    gaussian(n, 1, seed).as_slice().to_vec()
}
