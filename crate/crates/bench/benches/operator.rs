use bds_core::functions::registry;
use bds_core::{moments, operator, QuadratureConfig, ShapeParams};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn operator_grid(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let f = registry("exp_neg").unwrap();
    let xs: Vec<f64> = (0..16).map(|i| 0.25 * i as f64).collect();
    let mut group = c.benchmark_group("apply_grid");
    for n in [32, 256, 2048] {
        let p = ShapeParams::from_ints(n, 1, 2, 1, 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| operator::apply_grid(p, &f, black_box(&xs), &cfg).unwrap())
        });
    }
    group.finish();
}

fn derivative(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let f = registry("sin").unwrap();
    let p = ShapeParams::from_ints(256, 1, 1, 1, 2).unwrap();
    let mut group = c.benchmark_group("apply_derivative");
    for r in [1, 2, 4] {
        group.bench_with_input(BenchmarkId::from_parameter(r), &r, |b, &r| {
            b.iter(|| operator::apply_derivative(&p, &f, r, black_box(1.3), &cfg).unwrap())
        });
    }
    group.finish();
}

fn moment_table(c: &mut Criterion) {
    let p = ShapeParams::from_ints(100, 2, 3, 1, 2).unwrap();
    let mut group = c.benchmark_group("central_moments");
    for m in [4, 8, 12] {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| moments::central_moments(black_box(&p), m))
        });
    }
    group.finish();
}

criterion_group!(benches, operator_grid, derivative, moment_table);
criterion_main!(benches);
