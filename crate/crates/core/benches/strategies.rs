use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use quapi::itm::{brute_force_path_sum_with, propagate_with};
use quapi::{
    build_transfer_tensor, eta_coefficients, BathModel, InitialState, QubitParameters, Strategy,
};

const DT: f64 = 12.707;
const STRATEGIES: [(&str, Strategy); 2] = [
    ("sequential", Strategy::Sequential),
    ("parallel", Strategy::Parallel),
];

fn setup() -> (QubitParameters, BathModel) {
    (
        QubitParameters::new(51.8, 122.0, 0.5).unwrap(),
        BathModel::ohmic(5e-6, 5.0, 30.0).unwrap(),
    )
}

fn response_grid(c: &mut Criterion) {
    let (_, bath) = setup();
    let times: Vec<f64> = (0..256).map(|i| i as f64 * 0.2).collect();
    let mut g = c.benchmark_group("response_grid_256");
    for (name, s) in STRATEGIES {
        g.bench_function(name, |b| {
            b.iter(|| bath.response_grid(black_box(&times), s).unwrap())
        });
    }
    g.finish();
}

fn brute_force(c: &mut Criterion) {
    let (q, bath) = setup();
    let rho0 = InitialState::Plus.density_matrix().unwrap();
    let table = eta_coefficients(&bath, DT, 8, 8).unwrap();
    let mut g = c.benchmark_group("brute_force_n8");
    g.sample_size(10);
    for (name, s) in STRATEGIES {
        g.bench_function(name, |b| {
            b.iter(|| brute_force_path_sum_with(&rho0, &q, &table, 8, s).unwrap())
        });
    }
    g.finish();
}

fn propagate(c: &mut Criterion) {
    let (q, bath) = setup();
    let rho0 = InitialState::Plus.density_matrix().unwrap();
    let k = q.short_time_propagator(DT).unwrap();
    let mut g = c.benchmark_group("propagate_100_steps");
    g.sample_size(10);
    for m in [6, 7] {
        let table = eta_coefficients(&bath, DT, 100, m).unwrap();
        let t = build_transfer_tensor(&k, &table);
        for (name, s) in STRATEGIES {
            g.bench_with_input(BenchmarkId::new(name, m), &m, |b, _| {
                b.iter(|| propagate_with(&rho0, &t, &table, 100, 100, s).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, response_grid, brute_force, propagate);
criterion_main!(benches);
