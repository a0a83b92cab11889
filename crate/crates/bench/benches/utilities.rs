use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rosdyn::utility::{InnerMethod, QuadratureConfig};
use rosdyn::{build_coupled, build_cycle, CouplingSpec, Evaluator, ItemSpec, MarketInstance, TieBreak};

fn smooth(c: &mut Criterion) {
    let cycle = build_cycle(5, 7).unwrap();
    let m5 = [1.3, 1.7, 2.1, 1.2, 2.6];
    let coupled = build_coupled(&CouplingSpec::preset_a(), 7).unwrap();
    let m9: Vec<f64> = (0..coupled.n_bidders()).map(|i| 1.1 + 0.2 * i as f64).collect();
    let exact = Evaluator::default();
    let tensor = Evaluator::new(QuadratureConfig { inner: InnerMethod::Tensor, ..QuadratureConfig::default() }).unwrap();
    c.bench_function("five-cycle utilities (exact inner)", |b| b.iter(|| exact.utilities(&cycle, black_box(&m5)).unwrap()));
    c.bench_function("five-cycle utilities (tensor)", |b| b.iter(|| tensor.utilities(&cycle, black_box(&m5)).unwrap()));
    c.bench_function("coupling-a utilities", |b| b.iter(|| exact.utilities(&coupled, black_box(&m9)).unwrap()));
    c.bench_function("five-cycle gradient", |b| b.iter(|| exact.utility_gradient(&cycle, black_box(&m5), 1e-5).unwrap()));
}

fn discrete(c: &mut Criterion) {
    let items = (0..64)
        .map(|j| ItemSpec::fixed((0..8).map(|b| (b, 1.0 + ((j * 7 + b * 3) % 11) as f64))).with_tie_break(TieBreak::UniformSplit))
        .collect();
    let inst = MarketInstance::numbered(8, items, 0.7);
    let m: Vec<f64> = (0..8).map(|i| 1.0 + 0.1 * i as f64).collect();
    let eval = Evaluator::default();
    c.bench_function("64 fixed items, 8 bidders", |b| b.iter(|| eval.utilities(&inst, black_box(&m)).unwrap()));
}

criterion_group!(benches, smooth, discrete);
criterion_main!(benches);
