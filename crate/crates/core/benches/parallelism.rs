//! Compares the sequential and (feature-gated) parallel paths for the
//! two embarrassingly parallel workloads: cross-validation ensembles and
//! parameter sweeps.

use criterion::{criterion_group, criterion_main, Criterion};

use tipping_sim::scenario::{paper_scenario, run_sweep, run_sweep_seq, SweepSpec, SweepTarget};
use tipping_sim::tipping::{run_ensemble, run_ensemble_seq};

fn bench_ensemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("crossval_ensemble_40");
    group.bench_function("sequential", |b| {
        b.iter(|| run_ensemble_seq(40, 42).unwrap())
    });
    group.bench_function("default", |b| b.iter(|| run_ensemble(40, 42).unwrap()));
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let mut base = paper_scenario();
    base.config.max_steps = 400;
    let values: Vec<f64> = (1..=64).map(|i| 0.2 + 0.05 * i as f64).collect();
    let spec = SweepSpec::new(SweepTarget::TEff, values).unwrap();
    let mut group = c.benchmark_group("t_eff_sweep_64x400");
    group.bench_function("sequential", |b| {
        b.iter(|| run_sweep_seq(&base, &spec).unwrap())
    });
    group.bench_function("default", |b| b.iter(|| run_sweep(&base, &spec).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_ensemble, bench_sweep);
criterion_main!(benches);
