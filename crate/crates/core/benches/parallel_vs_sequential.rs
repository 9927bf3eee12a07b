use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use henon_core::branch::sweep_minimal;
use henon_core::domain::{ProblemSpec, Symmetry};
use henon_core::exec::Exec;
use henon_core::mountain_pass::{local_min_radial, mp_planar, MPConfig, PlanarResolution};

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn minimal_sweep(c: &mut Criterion) {
    let lambdas: Vec<f64> = (1..=32).map(|k| 0.1 * k as f64).collect();
    let mut group = c.benchmark_group("minimal_sweep");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::new(name, lambdas.len()), &exec, |b, &exec| {
            b.iter(|| sweep_minimal(3, 2.0, 3.0, black_box(&lambdas), 2000, exec).unwrap())
        });
    }
    group.finish();
}

fn planar_mountain_pass(c: &mut Criterion) {
    let spec = ProblemSpec::radial(2, 20.0, 3.0, 1e-3);
    let res = PlanarResolution {
        mr: 60,
        mphi: 24,
        kappa: 0.8,
    };
    let seq = MPConfig {
        exec: Exec::Sequential,
        ..MPConfig::default()
    };
    let local = local_min_radial(&spec, res.mr, &seq).unwrap();
    let base = local.record.field.as_radial().unwrap().clone();
    let axial = spec.with_symmetry(Symmetry::Axial);
    let mut group = c.benchmark_group("planar_mountain_pass");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        let cfg = MPConfig { exec, ..MPConfig::default() };
        group.bench_function(name, |b| b.iter(|| mp_planar(&axial, res, black_box(&base), &cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, minimal_sweep, planar_mountain_pass);
criterion_main!(benches);
