use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use modpid::dist::gates;
use modpid::experiment::{bin_cell, run_cell};
use modpid::pid::{pid_broja, pid_ccs, pid_imin, BrojaOptions, CcsVariant};
use modpid_bench::{binned_joint, small_batch, small_cell};

fn decompositions(c: &mut Criterion) {
    let opts = BrojaOptions::default();
    for (name, d) in [("and", gates::and()), ("xor", gates::xor()), ("2x6x6", binned_joint())] {
        let mut g = c.benchmark_group(name);
        g.bench_function("imin", |b| b.iter(|| pid_imin(black_box(&d)).unwrap()));
        g.bench_function("broja", |b| b.iter(|| pid_broja(black_box(&d), &opts).unwrap()));
        g.bench_function("ccs", |b| b.iter(|| pid_ccs(black_box(&d), CcsVariant::default()).unwrap()));
        g.finish();
    }
}

fn pipeline(c: &mut Criterion) {
    let (config, batch) = small_batch(100_000);
    c.bench_function("binning/100k", |b| {
        b.iter_batched(|| batch.clone(), |batch| bin_cell(&config, &batch).unwrap(), BatchSize::LargeInput)
    });
    let mut g = c.benchmark_group("cell");
    g.sample_size(10);
    let cell = small_cell(100_000);
    g.bench_function("run/100k", |b| b.iter(|| run_cell(black_box(&cell)).unwrap()));
    g.finish();
}

criterion_group!(benches, decompositions, pipeline);
criterion_main!(benches);
