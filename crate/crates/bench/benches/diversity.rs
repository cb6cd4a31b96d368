use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use satdiv::diversity::entropy;
use satdiv::Measure;
use satdiv_bench::random_population;

fn bench_entropy(c: &mut Criterion) {
    let measure = Measure::h1(100);
    let p = random_population(100, 20, 21, 7);
    c.bench_function("entropy_table_mu21_n100", |b| {
        b.iter(|| black_box(&p).entropy(&measure))
    });
    c.bench_function("entropy_recompute_mu21_n100", |b| {
        b.iter(|| entropy(black_box(p.members()), &measure))
    });
    c.bench_function("least_contributor_mu21_n100", |b| {
        b.iter(|| black_box(&p).least_contributor(&measure))
    });
}

criterion_group!(benches, bench_entropy);
criterion_main!(benches);
