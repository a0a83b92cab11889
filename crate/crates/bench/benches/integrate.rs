use criterion::{criterion_group, criterion_main, Criterion};
use rosdyn::circuit::{compile_network, default_gate_params, CircuitMode};
use rosdyn::gallery::{circuit_start, three_nor};
use rosdyn::{build_cycle, integrate, Method, Settings};

fn runs(c: &mut Criterion) {
    let cycle = build_cycle(3, 7).unwrap();
    let m0 = [1.2, 1.9, 2.7];
    let mut g = c.benchmark_group("integrate");
    g.sample_size(10);
    g.bench_function("three-cycle, 100 rk4 steps", |b| {
        b.iter(|| integrate(&cycle, &m0, &Settings::new(1.0).dt(0.01).sample_every(0.05)).unwrap())
    });
    g.bench_function("three-cycle, rkf45 to t = 1", |b| {
        b.iter(|| integrate(&cycle, &m0, &Settings::new(1.0).method(Method::rkf45()).sample_every(0.05)).unwrap())
    });
    let nor = compile_network(&three_nor().unwrap(), &default_gate_params(), CircuitMode::Full).unwrap();
    let start = circuit_start(&nor, 1);
    g.bench_function("three-nor with events, t = 1", |b| {
        b.iter(|| integrate(&nor.instance, &start, &Settings::new(1.0).dt(1e-3).sample_every(0.05)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, runs);
criterion_main!(benches);
