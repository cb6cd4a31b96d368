use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use satdiv::{run, Distribution, RunConfig, Variant};
use satdiv_bench::instance;

/// 100 iterations on power-law instances, n=100, m=210.
fn bench_iterations(c: &mut Criterion) {
    let f = instance(100, 210, Distribution::PowerLaw { beta: 2.75 }, 3);
    let mut group = c.benchmark_group("run_100_iterations");
    group.sample_size(10);
    for variant in [
        Variant::Bitflip,
        Variant::EdoMutation,
        Variant::EdoCrossover,
    ] {
        let mut cfg = RunConfig::new(variant);
        cfg.iterations = 100;
        cfg.seed = 5;
        group.bench_function(BenchmarkId::from_parameter(variant), |b| {
            b.iter(|| run(&mut f.clone(), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_iterations);
criterion_main!(benches);
