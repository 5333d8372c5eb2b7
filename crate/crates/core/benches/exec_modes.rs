//! Sequential against parallel execution for the two data-parallel hot
//! spots: sweep trials and certificate probe grids.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pulse_core::certificate::{solve_certificate_1d, verify_certificate, VerifyOptions};
use pulse_core::experiments::{run_sweep_nu, ExperimentConfig};
use pulse_core::kernel::{default_admissibility, KernelSpec};
use pulse_core::ExecMode;

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn sweep_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_trials");
    group.sample_size(10);
    let base = ExperimentConfig::from_json(
        r#"{"kernel": "cauchy", "nu_range": {"start": 0.6, "stop": 0.7, "step": 0.05}, "trials_per_point": 4}"#,
    )
    .unwrap();
    for (name, mode) in MODES {
        let mut cfg = base.clone();
        cfg.exec = mode;
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| black_box(run_sweep_nu(cfg).unwrap().0.transition_nu))
        });
    }
    group.finish();
}

fn certificate_probes(c: &mut Criterion) {
    let mut group = c.benchmark_group("certificate_probes");
    let kernel = KernelSpec::gaussian();
    let report = default_admissibility(&kernel).unwrap();
    let support: Vec<f64> = (0..8).map(|i| 2.0 * i as f64).collect();
    let signs: Vec<f64> = (0..8).map(|i| if i % 3 == 0 { -1.0 } else { 1.0 }).collect();
    let cert = solve_certificate_1d(&kernel, &support, &signs).unwrap();
    for (name, mode) in MODES {
        let opts = VerifyOptions::new(1e-4, 5.0, report.epsilon, report.beta).with_mode(mode);
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| black_box(verify_certificate(&cert, opts).unwrap().valid))
        });
    }
    group.finish();
}

criterion_group!(benches, sweep_trials, certificate_probes);
criterion_main!(benches);
