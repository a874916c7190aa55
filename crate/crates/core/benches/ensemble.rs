use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rankpa::parallel;
use rankpa::phase::{analysis_grid, second_or_sixth_of_seven};
use rankpa::roots::{critical_points, find_roots_with};
use rankpa::{run, ChoiceVector, ModelConfig};

fn ensembles(c: &mut Criterion) {
    let base = ModelConfig::new(ChoiceVector::basis(2, 3).unwrap(), -0.75, 20_000, 0);
    let seeds: Vec<u64> = (0..8).collect();
    let mut group = c.benchmark_group("ensemble_8x20k");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| parallel::map(&seeds, |&s| run(&base.with_seed(s)).unwrap().final_row().psi[100]))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| parallel::map_sequential(&seeds, |&s| run(&base.with_seed(s)).unwrap().final_row().psi[100]))
    });
    group.finish();
}

fn root_sweeps(c: &mut Criterion) {
    let xi = second_or_sixth_of_seven();
    let alpha = -0.85;
    let crit = critical_points(alpha, &xi).unwrap();
    let mut group = c.benchmark_group("root_sweep");
    for points in [200usize, 1000] {
        let grid = analysis_grid(points);
        group.bench_with_input(BenchmarkId::new("parallel", points), &grid, |b, grid| {
            b.iter(|| parallel::map(grid, |&x| find_roots_with(x, alpha, &xi, &crit).unwrap().roots.len()))
        });
        group.bench_with_input(BenchmarkId::new("sequential", points), &grid, |b, grid| {
            b.iter(|| parallel::map_sequential(grid, |&x| find_roots_with(x, alpha, &xi, &crit).unwrap().roots.len()))
        });
    }
    group.finish();
}

fn single_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("single_run");
    group.sample_size(10);
    for (name, xi) in [("mid3", ChoiceVector::basis(2, 3).unwrap()), ("sec6", second_or_sixth_of_seven())] {
        let config = ModelConfig::new(xi, -0.85, 100_000, 1);
        group.bench_function(name, |b| b.iter(|| run(black_box(&config)).unwrap().rows.len()));
    }
    group.finish();
}

criterion_group!(benches, ensembles, root_sweeps, single_run);
criterion_main!(benches);
