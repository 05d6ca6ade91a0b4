use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use rbki::lab::{sigma_min_experiment, SpectrumModel};
use rbki::par::try_map_trials;
use rbki::random::{gaussian_matrix, rng_for};
use rbki::{error_metrics, rbki, synth_matrix, DenseOperator, Execution, KrylovConfig, LinearOperator, SpectrumKind, SpectrumSpec};

fn lab_sweep(c: &mut Criterion) {
    let spectrum = SpectrumModel::geometric(24, 0.81).unwrap();
    let mut group = c.benchmark_group("sigma_min_sweep");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |bench| {
            bench.iter(|| sigma_min_experiment(&spectrum, 6, 64, 1, 0.1, 1.0, exec).unwrap())
        });
    }
    group.finish();
}

fn approximation_trials(c: &mut Criterion) {
    let m = synth_matrix(&SpectrumSpec::new(SpectrumKind::Geometric { ratio: 0.9 }, 200, 200, 3)).unwrap();
    let op = DenseOperator::new(m.matrix).unwrap();
    let mut group = c.benchmark_group("rbki_trials");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |bench| {
            bench.iter(|| {
                try_map_trials(16, exec, |i| {
                    let approx = rbki(&op, &KrylovConfig::new(10, 2, 12, i as u64))?;
                    error_metrics(&op, &approx, &m.svd).map(|e| e.frobenius_ratio)
                })
                .unwrap()
            })
        });
    }
    group.finish();
}

fn blocked_products(c: &mut Criterion) {
    let n = 400;
    let op = DenseOperator::new(gaussian_matrix(n, n, &mut rng_for(1, 0))).unwrap();
    let mut group = c.benchmark_group("matvec_blocking");
    for b in [1usize, 4, 16] {
        let x = gaussian_matrix(n, b, &mut rng_for(2, 0));
        group.bench_with_input(BenchmarkId::new("blocked", b), &x, |bench, x| {
            bench.iter(|| black_box(op.apply(x)))
        });
        group.bench_with_input(BenchmarkId::new("column_by_column", b), &x, |bench, x| {
            bench.iter(|| {
                for j in 0..x.ncols() {
                    black_box(op.apply(&x.columns(j, 1).into_owned()));
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, lab_sweep, approximation_trials, blocked_products);
criterion_main!(benches);
