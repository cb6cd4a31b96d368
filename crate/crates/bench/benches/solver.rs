use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use satdiv::solver::solve;
use satdiv::{Distribution, SolverConfig};
use satdiv_bench::instance;

fn bench_solve(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("solve_n100");
    for (name, dist, m) in [
        ("powerlaw", Distribution::PowerLaw { beta: 2.75 }, 210),
        ("uniform", Distribution::Uniform, 270),
        ("uniform", Distribution::Uniform, 440),
    ] {
        let f = instance(100, m, dist, 1);
        group.bench_with_input(BenchmarkId::new(name, m), &f, |b, f| {
            b.iter(|| solve(black_box(f), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_solve);
criterion_main!(benches);
