//! Forward solves, observation operators and one localizer run.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use wavefocus::geometry::{build_region, Shape};
use wavefocus::linops::LinearMap;
use wavefocus::maxwell::{forward_maxwell, make_em_op, EmBoundarySeries, Observed};
use wavefocus::wave::{forward_wave, make_l_op, AdjointMode, BoundaryTimeSeries};
use wavefocus::wave_localize::{localize_space, LocalizeOptions};
use wavefocus_bench::{em_fixture, middle_window, wave_fixture};

fn forward(c: &mut Criterion) {
    let p = wave_fixture(128, 200);
    let f = BoundaryTimeSeries::from_fn(p.gamma().len(), p.time(), |k, t| (t * (k + 1) as f64).sin());
    c.bench_function("wave forward 128² × 200", |b| b.iter(|| forward_wave(&p, black_box(&f)).unwrap()));
    let p = em_fixture(24, 60);
    let f = EmBoundarySeries::from_fn(p.gamma().len(), p.time(), |k, t| (t * (k + 1) as f64).sin());
    c.bench_function("yee forward 24³ × 60", |b| b.iter(|| forward_maxwell(&p, black_box(&f)).unwrap()));
}

fn operators(c: &mut Criterion) {
    let p = wave_fixture(64, 200);
    let w = middle_window(p.grid(), p.time(), &[0.4, 0.5]);
    let l = make_l_op(&p, &w, AdjointMode::Exact).unwrap();
    let x = vec![1.0; l.domain().dim()];
    let y = vec![1.0; l.codomain().dim()];
    c.bench_function("wave L apply 64²", |b| b.iter(|| l.apply(black_box(&x))));
    c.bench_function("wave L adjoint 64²", |b| b.iter(|| l.adjoint(black_box(&y))));
    let p = em_fixture(16, 60);
    let w = middle_window(p.yee().grid(), p.time(), &[0.4, 0.5, 0.5]);
    let l = make_em_op(&p, &w, Observed::L, AdjointMode::Exact).unwrap();
    let y = vec![1.0; l.codomain().dim()];
    c.bench_function("yee L adjoint 16³", |b| b.iter(|| l.adjoint(black_box(&y))));
}

fn localize(c: &mut Criterion) {
    let p = wave_fixture(32, 100);
    let w = middle_window(p.grid(), p.time(), &[0.3, 0.5]);
    let d = build_region(p.grid(), &Shape::ball(&[0.7, 0.5], 0.15)).unwrap();
    let opts = LocalizeOptions { k_schedule: vec![1.0, 100.0], ..LocalizeOptions::default() };
    let mut g = c.benchmark_group("localize");
    g.sample_size(10);
    g.bench_function("wave space 32², k ∈ {1, 100}", |b| b.iter(|| localize_space(&p, &w, &d, &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, forward, operators, localize);
criterion_main!(benches);
