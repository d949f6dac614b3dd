//! Compares the parallel and sequential intersection-regularity checks
//! on a production-sized index list.

use cantor_games::designs::{gen_index_list, verify_item1, verify_item1_seq, Xi};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

fn bench_item1(c: &mut Criterion) {
    let design = gen_index_list(8192, 4, 32, Xi::new(9, 20), 2, 42);
    let mut group = c.benchmark_group("verify_item1_depth3");
    group.sample_size(20);
    group.bench_function("sequential", |b| {
        b.iter_batched(
            || design.clone(),
            |d| verify_item1_seq(&d, 3).is_ok(),
            BatchSize::LargeInput,
        )
    });
    group.bench_function("default", |b| {
        b.iter_batched(
            || design.clone(),
            |d| verify_item1(&d, 3).is_ok(),
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench_item1);
criterion_main!(benches);
