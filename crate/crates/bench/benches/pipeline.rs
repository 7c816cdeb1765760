use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use xsens_bench::scenario;
use xsens_core::metrics::run_trial;
use xsens_core::{inverse_recon, Method, Snr, Truth};

fn pipeline(c: &mut Criterion) {
    let truth = Truth::build(&scenario(64)).expect("scenario");
    let mut group = c.benchmark_group("pipeline_64x64");
    group.sample_size(10);
    group.bench_function("truth_build", |b| b.iter(|| Truth::build(black_box(&scenario(64)))));
    group.bench_function("simulate", |b| b.iter(|| truth.simulate(Snr::Finite(20.0), black_box(7))));
    group.bench_function("inverse_recon", |b| b.iter(|| inverse_recon(black_box(truth.clean_kspace().clone()))));
    group.bench_function("trial_both_methods", |b| {
        b.iter(|| run_trial(&truth, Snr::Finite(20.0), black_box(7), &Method::ALL))
    });
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
