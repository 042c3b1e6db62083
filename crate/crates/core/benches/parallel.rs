use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tfconc::compactness::duality_check;
use tfconc::frames::gram_matrix;
use tfconc::moments::concentration_reports;
use tfconc::systems::{build_perturbed_exact, enumerate_exact_g0, materialize};
use tfconc::testfns::smooth_family;
use tfconc::{make_grid, Execution};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bench_gram(c: &mut Criterion) {
    let grid = make_grid(32.0, 4096).unwrap();
    let system = materialize(&enumerate_exact_g0(64), grid, Execution::Parallel).unwrap();
    let mut group = c.benchmark_group("gram_matrix_64");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| gram_matrix(&system, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_reports(c: &mut Criterion) {
    let grid = make_grid(32.0, 4096).unwrap();
    let family = smooth_family(grid, 32, 0).unwrap();
    let mut group = c.benchmark_group("concentration_reports_32");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| concentration_reports(&family, 1.5, 2.0, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_construction(c: &mut Criterion) {
    let grid = make_grid(32.0, 4096).unwrap();
    let mut group = c.benchmark_group("build_perturbed_exact_16");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| build_perturbed_exact(grid, 16, 0.1, 2.0, 2.0, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_moduli(c: &mut Criterion) {
    let grid = make_grid(32.0, 4096).unwrap();
    let family = smooth_family(grid, 32, 1).unwrap();
    let dt = grid.spacing();
    let shifts: Vec<f64> = (0..16).map(|k| k as f64 * 8.0 * dt).collect();
    let radii = [0.5, 1.0, 2.0, 4.0, 8.0];
    let mut group = c.benchmark_group("duality_check_32");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| duality_check(&family, &shifts, &radii, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_gram,
    bench_reports,
    bench_construction,
    bench_moduli
);
criterion_main!(benches);
