use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng as _;
use std::hint::black_box;

use dypp_core::dypp::{fit_quadratic, predict, Distance, Method, PredictorConfig, QuadraticFitter, WeightWindow};
use dypp_core::rng_from_seed;

fn fits(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_quadratic");
    for m in [3, 5, 8, 64] {
        let ys: Vec<f64> = (1..=m).map(|x| 0.2 * (x * x) as f64 - x as f64 + 3.0).collect();
        group.bench_with_input(BenchmarkId::new("fresh", m), &m, |b, _| {
            b.iter(|| fit_quadratic(black_box(&ys)).unwrap())
        });
        let fitter = QuadraticFitter::new(m).unwrap();
        group.bench_with_input(BenchmarkId::new("reused", m), &m, |b, _| {
            b.iter(|| fitter.fit(black_box(&ys)).unwrap())
        });
    }
    group.finish();
}

fn predictions(c: &mut Criterion) {
    let mut group = c.benchmark_group("predict");
    let mut rng = rng_from_seed(0);
    for params in [16, 1024, 65536] {
        for method in [Method::Nap, Method::Adap] {
            let cfg = PredictorConfig::new(method, 5, 3.0, 1e-4, 0.002);
            let mut window = WeightWindow::for_config(&cfg, params).unwrap();
            while !window.is_full() {
                let w: Vec<f64> = (0..params).map(|_| rng.random_range(-1.0..1.0)).collect();
                window.push(&w).unwrap();
            }
            let distance = match method {
                Method::Nap => Distance::Nap { epoch: 5 },
                _ => Distance::Adap,
            };
            group.bench_with_input(BenchmarkId::new(method.name(), params), &params, |b, _| {
                b.iter(|| predict(black_box(&window), distance, &cfg).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, fits, predictions);
criterion_main!(benches);
