use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use mvts::harness::{Experiment, ExperimentConfig};
use mvts::linalg::{cholesky, sherman_morrison_in_place};
use mvts::sampling::sample_gamma;
use mvts::{NoiseKind, PolicyKind, PolicyTag, RngStream, Sampler};
use mvts_bench::{warmed_policy, warmed_posterior};

fn linalg(c: &mut Criterion) {
    let post = warmed_posterior(8, 500, 1);
    let x = [0.1, -0.2, 0.3, 0.05, -0.1, 0.2, 0.0, 0.15];
    c.bench_function("cholesky_d8", |b| {
        b.iter(|| cholesky(black_box(post.design_inverse())))
    });
    c.bench_function("sherman_morrison_d8", |b| {
        b.iter_batched(
            || post.design_inverse().clone(),
            |mut m| sherman_morrison_in_place(&mut m, black_box(&x)),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("posterior_observe_d8", |b| {
        b.iter_batched(
            || post.clone(),
            |mut p| p.observe(black_box(&x), 0.3),
            BatchSize::SmallInput,
        )
    });
}

fn sampling(c: &mut Criterion) {
    let mut rng = RngStream::new(2);
    c.bench_function("standard_normal", |b| b.iter(|| rng.standard_normal()));
    c.bench_function("gamma_shape_2p5", |b| {
        b.iter(|| sample_gamma(2.5, 1.0, &mut rng))
    });
    c.bench_function("gamma_shape_0p5", |b| {
        b.iter(|| sample_gamma(0.5, 1.0, &mut rng))
    });
}

fn policies(c: &mut Criterion) {
    let kinds = [
        PolicyKind::MvtsD,
        PolicyKind::MvtsDn { u: 1.0, v: 1.0 },
        PolicyKind::TsA { v: 1.0 },
        PolicyKind::CfMvts,
    ];
    for kind in kinds {
        let (policy, ctx) = warmed_policy(kind, 200, 3);
        let mut rng = RngStream::new(4);
        c.bench_function(&format!("choose_{}_k10_d8", kind.tag()), |b| {
            b.iter(|| policy.choose(black_box(&ctx), &mut rng))
        });
    }
}

fn replication(c: &mut Criterion) {
    let cfg = ExperimentConfig {
        horizon: 1000,
        replications: 1,
        policies: vec![PolicyTag::MvtsD],
        ..ExperimentConfig::portfolio(1.0, NoiseKind::Gaussian)
    };
    let exp = Experiment::new(cfg).expect("valid config");
    let mut group = c.benchmark_group("replication");
    group.sample_size(10);
    group.bench_function("mvts_d_t1000", |b| b.iter(|| exp.run_replication(0)));
    group.finish();
}

criterion_group!(benches, linalg, sampling, policies, replication);
criterion_main!(benches);
