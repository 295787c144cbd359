use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qsvt_bench::{chain, echo_circuit, product_state, shifted_sign_pipeline};
use qsvt_core::estimation::{self, EstimationMode};
use qsvt_core::interleaved::{self, ExtrapolationConfig, Measurement};
use qsvt_core::product_formula::{apply_formula, suzuki};
use qsvt_core::{funcapprox, gqsp, rng, Observable};

fn pauli_rotation(c: &mut Criterion) {
    let mut g = c.benchmark_group("pauli_exp");
    for n in [8usize, 12, 16] {
        let word = "XYZ".repeat(n).chars().take(n).collect::<String>().parse().unwrap();
        let mut s = product_state(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| s.apply_pauli_exp(black_box(&word), 0.1).unwrap())
        });
    }
    g.finish();
}

fn trotter_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("trotter_step");
    for (n, k) in [(10usize, 1usize), (10, 2), (14, 1)] {
        let h = chain(n);
        let pf = suzuki(k, h.len()).unwrap();
        let mut s = product_state(n);
        g.bench_function(format!("n{n}_k{k}"), |b| b.iter(|| apply_formula(&mut s, &h, &pf, 0.05, 1).unwrap()));
    }
    g.finish();
}

fn extrapolation(c: &mut Criterion) {
    let mut g = c.benchmark_group("extrapolated_estimate");
    g.sample_size(10);
    let circ = echo_circuit(6);
    let psi = product_state(6);
    let meas = Measurement::plain(Observable::pauli("ZZIIII").unwrap());
    for eps in [1e-2, 1e-4] {
        let cfg = ExtrapolationConfig::new(1, eps, EstimationMode::ExactRead);
        g.bench_function(format!("echo6_eps{eps:e}"), |b| {
            b.iter(|| interleaved::extrapolated_estimate(&circ, &psi, &meas, &cfg).unwrap())
        });
    }
    let (circ, start, meas) = shifted_sign_pipeline(3, 1e-2);
    let cfg = ExtrapolationConfig::new(1, 1e-3, EstimationMode::ExactRead);
    g.bench_function("shifted_sign_n3", |b| {
        b.iter(|| interleaved::extrapolated_estimate(&circ, &start, &meas, &cfg).unwrap())
    });
    g.finish();
}

fn polynomials(c: &mut Criterion) {
    let mut g = c.benchmark_group("polynomials");
    for eps in [1e-2, 1e-4] {
        g.bench_function(format!("filter_build_eps{eps:e}"), |b| b.iter(|| funcapprox::filter(0.2, eps).unwrap()));
        let rep = funcapprox::filter(0.2, eps).unwrap();
        g.bench_function(format!("angle_synthesis_d{}", rep.degree()), |b| {
            b.iter(|| gqsp::synthesize_angles(black_box(&rep.polynomial)).unwrap())
        });
    }
    g.finish();
}

fn amplitude_estimation(c: &mut Criterion) {
    let psi = product_state(8);
    c.bench_function("iqae_eps1e-3", |b| {
        b.iter(|| estimation::iqae(&psi, &|i| i & 1 == 1, 1e-3, 0.05, &mut rng::stream(3, 0)).unwrap())
    });
}

criterion_group!(benches, pauli_rotation, trotter_step, extrapolation, polynomials, amplitude_estimation);
criterion_main!(benches);
