//! Parallel versus sequential throughput of the Monte Carlo hot paths.
//!
//! Run with the default features to exercise the rayon path alongside the
//! sequential fallback:
//!
//! ```text
//! cargo bench -p afd-core
//! cargo bench -p afd-core --no-default-features   # sequential-only build
//! ```

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use afd_core::distfit::PdfFamily;
use afd_core::inputdesign::{
    draw_interval_noise, draw_run, evaluate_candidate, propagate_candidate,
    propagate_candidate_seq, IntervalContext,
};
use afd_core::rng::Streams;
use afd_core::sysmodel::three_tank::{three_tank_bank, ThreeTankConfig};
use afd_core::worstcase::InnerOptions;

fn bench_ensemble_propagation(c: &mut Criterion) {
    let bank = three_tank_bank(&ThreeTankConfig::nominal()).unwrap();
    let streams = Streams::new(99);
    let mut group = c.benchmark_group("ensemble_propagation");
    for &n in &[256usize, 1024] {
        let draws = draw_run(&bank, &streams, n);
        let noise = draw_interval_noise(&bank, &streams, 0, n);
        let radii = [0.0, 0.0, 0.0];
        let inner = InnerOptions::default();
        let cx = IntervalContext {
            bank: &bank,
            t0: 0.0,
            t1: 100.0,
            dt: 1.0,
            states: &draws.init_states,
            params: &draws.params,
            noise: &noise,
            radii: &radii,
            family: PdfFamily::Normal,
            inner: &inner,
            clamp_quantile: None,
        };
        let u = [6e-5, 4e-5];
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, _| {
            b.iter(|| propagate_candidate_seq(&cx, &u).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, _| {
            b.iter(|| propagate_candidate(&cx, &u).unwrap())
        });
        #[cfg(not(feature = "parallel"))]
        group.bench_with_input(BenchmarkId::new("fallback", n), &n, |b, _| {
            b.iter(|| propagate_candidate(&cx, &u).unwrap())
        });
    }
    group.finish();
}

fn bench_candidate_evaluation(c: &mut Criterion) {
    let bank = three_tank_bank(&ThreeTankConfig::nominal()).unwrap();
    let streams = Streams::new(99);
    let n = 512;
    let draws = draw_run(&bank, &streams, n);
    let noise = draw_interval_noise(&bank, &streams, 0, n);
    let radii = [1.0, 1.0, 1.0];
    let inner = InnerOptions::default();
    let cx = IntervalContext {
        bank: &bank,
        t0: 0.0,
        t1: 100.0,
        dt: 1.0,
        states: &draws.init_states,
        params: &draws.params,
        noise: &noise,
        radii: &radii,
        family: PdfFamily::Normal,
        inner: &inner,
        clamp_quantile: None,
    };
    c.bench_function("evaluate_candidate/robust_512", |b| {
        b.iter(|| evaluate_candidate(&cx, &[6e-5, 4e-5]).unwrap())
    });
}

criterion_group!(
    benches,
    bench_ensemble_propagation,
    bench_candidate_evaluation
);
criterion_main!(benches);
