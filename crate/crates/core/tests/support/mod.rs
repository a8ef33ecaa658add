//! Independent oracles and data generators shared by integration and
//! acceptance tests. Nothing here calls into the library's numerics.
#![allow(dead_code, clippy::excessive_precision)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Gaussian Markov chain: x_{j+1} = rho x_j + sqrt(1 - rho^2) e, so the
/// precision matrix is tridiagonal and the true edges are (j, j+1).
pub fn chain_gaussian(n: usize, p: usize, rho: f64, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let s = (1.0 - rho * rho).sqrt();
    let mut m = DMatrix::zeros(n, p);
    for i in 0..n {
        let mut prev = normal(&mut r);
        m[(i, 0)] = prev;
        for j in 1..p {
            prev = rho * prev + s * normal(&mut r);
            m[(i, j)] = prev;
        }
    }
    m
}

pub fn white_noise(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    DMatrix::from_fn(n, p, |_, _| normal(&mut r))
}

/// Correlated columns: random mixing of white noise.
pub fn mixed_gaussian(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let z = DMatrix::from_fn(n, p, |_, _| normal(&mut r));
    let mix = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            r.random_range(-0.6..0.6)
        }
    });
    z * mix
}

/// Isotropic Gaussian blobs around the given centers, `per` points each.
pub fn blobs(centers: &[Vec<f64>], per: usize, sd: f64, seed: u64) -> (DMatrix<f64>, Vec<usize>) {
    let mut r = rng(seed);
    let d = centers[0].len();
    let n = centers.len() * per;
    let mut m = DMatrix::zeros(n, d);
    let mut labels = Vec::with_capacity(n);
    for (c, center) in centers.iter().enumerate() {
        for i in 0..per {
            for (j, mu) in center.iter().enumerate() {
                m[(c * per + i, j)] = mu + sd * normal(&mut r);
            }
            labels.push(c);
        }
    }
    (m, labels)
}

/// Edge-set F1 against a truth list of (a, b) with a < b.
pub fn edge_f1(found: &[(usize, usize)], truth: &[(usize, usize)]) -> f64 {
    let tp = found.iter().filter(|e| truth.contains(e)).count() as f64;
    if found.is_empty() && truth.is_empty() {
        return 1.0;
    }
    if tp == 0.0 {
        return 0.0;
    }
    let precision = tp / found.len() as f64;
    let recall = tp / truth.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Worst violation of the lasso stationarity conditions for
/// `(1/2N)|y - X b|^2 + lambda |b|_1`, using a freshly computed residual.
pub fn kkt_violation(x: &DMatrix<f64>, y: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let n = x.nrows();
    let mut resid = y.to_vec();
    for (j, b) in beta.iter().enumerate() {
        for i in 0..n {
            resid[i] -= x[(i, j)] * b;
        }
    }
    let mut worst: f64 = 0.0;
    for (j, &b) in beta.iter().enumerate() {
        let g: f64 = (0..n).map(|i| x[(i, j)] * resid[i]).sum::<f64>() / n as f64;
        let v = if b != 0.0 {
            (g - lambda * b.signum()).abs()
        } else {
            (g.abs() - lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

/// Silhouette from an explicit distance matrix.
pub fn brute_silhouette(data: &DMatrix<f64>, labels: &[usize]) -> Vec<f64> {
    let n = data.nrows();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for c in 0..data.ncols() {
                s += (data[(i, c)] - data[(j, c)]).powi(2);
            }
            dist[i][j] = s.sqrt();
        }
    }
    let k = labels.iter().max().unwrap() + 1;
    (0..n)
        .map(|i| {
            let members = |c: usize| (0..n).filter(move |&j| labels[j] == c);
            let own = members(labels[i]).count();
            if own == 1 {
                return 0.0;
            }
            let a = members(labels[i])
                .filter(|&j| j != i)
                .map(|j| dist[i][j])
                .sum::<f64>()
                / (own - 1) as f64;
            let mut b = f64::INFINITY;
            for c in (0..k).filter(|&c| c != labels[i]) {
                let m: Vec<usize> = members(c).collect();
                if !m.is_empty() {
                    b = b.min(m.iter().map(|&j| dist[i][j]).sum::<f64>() / m.len() as f64);
                }
            }
            (b - a) / a.max(b)
        })
        .collect()
}

/// Lanczos log-gamma (g = 7, 9 terms), x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Exp-sinh quadrature of `f` over `[a, inf)`, step halved until stable.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let term = |t: f64| {
        let e = (half_pi * t.sinh()).exp();
        let w = half_pi * t.cosh() * e;
        let v = f(a + e);
        if v == 0.0 || !w.is_finite() {
            0.0
        } else {
            v * w
        }
    };
    let t_max: f64 = 5.0;
    let mut h: f64 = 0.5;
    let mut prev = f64::NAN;
    loop {
        let steps = (t_max / h).round() as i64;
        let sum: f64 = (-steps..=steps).map(|k| term(k as f64 * h)).sum();
        let est = sum * h;
        if (est - prev).abs() < 1e-15 || h < 1.0 / 512.0 {
            return est;
        }
        prev = est;
        h /= 2.0;
    }
}

pub fn f_density(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_beta = ln_gamma(d1 / 2.0) + ln_gamma(d2 / 2.0) - ln_gamma((d1 + d2) / 2.0);
    (0.5 * d1 * (d1 / d2).ln() + (0.5 * d1 - 1.0) * x.ln()
        - 0.5 * (d1 + d2) * (d1 * x / d2).ln_1p()
        - ln_beta)
        .exp()
}

pub fn t_density(x: f64, df: f64) -> f64 {
    (ln_gamma((df + 1.0) / 2.0)
        - ln_gamma(df / 2.0)
        - 0.5 * (df * std::f64::consts::PI).ln()
        - 0.5 * (df + 1.0) * (x * x / df).ln_1p())
    .exp()
}

pub fn f_survival_oracle(x: f64, d1: f64, d2: f64) -> f64 {
    integrate_to_infinity(|u| f_density(u, d1, d2), x)
}

pub fn t_survival_oracle(x: f64, df: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - t_survival_oracle(-x, df);
    }
    integrate_to_infinity(|u| t_density(u, df), x)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
