use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use subdiff_bench::singular_source_run;
use subdiff_core::dg::{solve, InitialData, ProblemData, SourceData};
use subdiff_core::fem::FemSpace;
use subdiff_core::frac_ops::{convolution_weights, TimeGrid};
use subdiff_core::metrics::{e1_l2l2, e2_fractional};
use subdiff_core::mittag_leffler::mittag_leffler_neg;

fn mittag_leffler(c: &mut Criterion) {
    let xs: Vec<f64> = (0..200).map(|i| 0.25 * i as f64).collect();
    c.bench_function("mittag_leffler/200 points", |b| {
        b.iter(|| {
            xs.iter()
                .map(|&x| mittag_leffler_neg(0.4, 1.0, black_box(x)).unwrap())
                .sum::<f64>()
        })
    });
}

fn weights(c: &mut Criterion) {
    let grid = TimeGrid::dyadic(1.0, 12).unwrap();
    c.bench_function("convolution_weights/J=4096", |b| {
        b.iter(|| convolution_weights(0.4, black_box(&grid)).unwrap())
    });
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("dg_solve");
    group.sample_size(10);
    group.bench_function("interval n=256 J=1024", |b| {
        b.iter(|| singular_source_run(8, 10))
    });
    let space = Arc::new(FemSpace::square(32).unwrap());
    let grid = TimeGrid::dyadic(1.0, 7).unwrap();
    let data =
        ProblemData::new(0.4, 1.0, InitialData::Dirac([0.5, 0.5]), SourceData::Zero).unwrap();
    group.bench_function("square n=32 J=128 dirac", |b| {
        b.iter(|| solve(&data, &space, &grid).unwrap())
    });
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let coarse = singular_source_run(5, 8);
    let fine = singular_source_run(7, 10);
    let reference = fine.clone().into();
    let mut group = c.benchmark_group("metrics");
    group.sample_size(10);
    group.bench_function("e1", |b| b.iter(|| e1_l2l2(&coarse, &reference).unwrap()));
    group.bench_function("e2", |b| {
        b.iter(|| e2_fractional(&coarse, &fine, 0.4).unwrap())
    });
    group.finish();
}

criterion_group!(benches, mittag_leffler, weights, solver, metrics);
criterion_main!(benches);
