use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use gameseg_bench::{blobs, chain, gaussian, series};
use gameseg_core::clustering::{minibatch_kmeans, silhouette, KMeansParams};
use gameseg_core::data::{standardize, FeatureMatrix};
use gameseg_core::glasso::{graphical_lasso, CoordinateDescent, GlassoOptions};
use gameseg_core::stats::granger_test;
use std::hint::black_box;

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("cd_sweep");
    for &(n, p) in &[(2_000, 20), (20_000, 20), (2_000, 200)] {
        let design = gaussian(n, p, 1);
        group.throughput(Throughput::Elements((n * p) as u64));
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{n}x{p}")),
            &design,
            |b, d| {
                b.iter(|| {
                    let mut cd = CoordinateDescent::new(d, 0, 1e-3);
                    black_box(cd.sweep())
                })
            },
        );
    }
    group.finish();
}

fn glasso(c: &mut Criterion) {
    let mut group = c.benchmark_group("graphical_lasso");
    group.sample_size(10);
    for &p in &[5, 20] {
        let names = (0..p).map(|j| format!("v{j}")).collect();
        let m = FeatureMatrix::new(chain(2_000, p, 0.5, 2), names).unwrap();
        let z = standardize(&m).unwrap();
        group.bench_with_input(BenchmarkId::new("chain_2000", p), &z, |b, z| {
            b.iter(|| graphical_lasso(z, &GlassoOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn kmeans(c: &mut Criterion) {
    let data = blobs(3, 1_000, 4, 3);
    let params = KMeansParams::default();
    c.bench_function("minibatch_kmeans_3000x4_k3", |b| {
        b.iter(|| minibatch_kmeans(&data, 3, &params, 7).unwrap())
    });
}

fn silhouettes(c: &mut Criterion) {
    let data = blobs(3, 400, 4, 4);
    let labels: Vec<usize> = (0..data.nrows()).map(|i| i / 400).collect();
    c.bench_function("silhouette_1200x4", |b| {
        b.iter(|| silhouette(&data, &labels).unwrap())
    });
}

fn granger(c: &mut Criterion) {
    let x = series(10_000, 5);
    let y = series(10_000, 6);
    let mut group = c.benchmark_group("granger_10000");
    for lag in [1, 4] {
        group.bench_with_input(BenchmarkId::from_parameter(lag), &lag, |b, &lag| {
            b.iter(|| granger_test(&x, &y, lag, 0.05).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweep, glasso, kmeans, silhouettes, granger);
criterion_main!(benches);
