use std::hint::black_box;

use bladegauge::blade::blade_curvature;
use bladegauge::dynamics::SigmaLattice;
use bladegauge::numerics::{random_hermitian, unitary_exp};
use bladegauge::scenario::ScenarioSpec;
use criterion::{criterion_group, criterion_main, Criterion};

fn random_blade(big_n: usize, n: usize, dim: usize) -> bladegauge::blade::RotatingBlade {
    ScenarioSpec::RandomSmooth { seed: 1, big_n, n, dim }
        .build()
        .and_then(|s| s.blade())
        .expect("random blade builds")
}

fn exp(c: &mut Criterion) {
    let mut group = c.benchmark_group("unitary_exp");
    for n in [2, 4, 8] {
        let h = random_hermitian(n, 7);
        group.bench_function(format!("n{n}"), |b| b.iter(|| unitary_exp(black_box(&h), 0.3).unwrap()));
    }
    group.finish();
}

fn curvature(c: &mut Criterion) {
    let blade = random_blade(4, 2, 4);
    let curv = blade_curvature(&blade);
    let x = [0.1, -0.2, 0.3, 0.05];
    c.bench_function("curvature_routes_N4_n2", |b| b.iter(|| curv.routes(black_box(&x), 0, 1).unwrap()));
}

fn sigma(c: &mut Criterion) {
    let blade = random_blade(3, 1, 2);
    let lat = SigmaLattice::from_blade(&blade, vec![-0.5; 2], vec![0.5; 2], vec![8, 8], vec![false; 2]).unwrap();
    c.bench_function("sigma_step_8x8_N3", |b| b.iter(|| lat.step(black_box(0.05)).unwrap()));
}

criterion_group!(benches, exp, curvature, sigma);
criterion_main!(benches);
