//! Definition (factorial and power sum mod p^3) against the Bernoulli test,
//! on the prime ladder used by `wllab bench-lerch`.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wllab_core::classify;
use wllab_core::{CertifiedPrime, SharedBernoulli};

const LADDER: [u64; 4] = [5, 11, 101, 1009];

fn lerch_methods(c: &mut Criterion) {
    let table = SharedBernoulli::default();
    table.ensure(1008).unwrap();
    let mut group = c.benchmark_group("lerch");
    for p in LADDER.map(|p| CertifiedPrime::new(p).unwrap()) {
        group.bench_with_input(BenchmarkId::new("definition", p.get()), &p, |b, &p| {
            b.iter(|| classify::is_lerch_prime_definition(black_box(p)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("test", p.get()), &p, |b, &p| {
            b.iter(|| classify::is_lerch_prime_test(&table, black_box(p)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, lerch_methods);
criterion_main!(benches);
