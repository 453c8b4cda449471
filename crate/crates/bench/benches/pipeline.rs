use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use hypdel::delaunay_cert::{convexity_check, polar_dual};
use hypdel::energy::EnergyVariant;
use hypdel::fixtures;
use hypdel::fuchsian::{build_regular_4g_group, evaluate_word};
use hypdel::harmonic::{default_start, random_positions, solve_harmonic, EdgeWeights, SolverOptions};
use hypdel::surface::MarkedSurface;
use hypdel::teich_opt::{deform_rep, optimize_metric, random_h1_direction, OuterOptions};

fn uneven(ms: &MarkedSurface) -> EdgeWeights {
    let c = (0..ms.complex.n_edges())
        .map(|e| match ms.complex.edge_key(e) {
            0 => 1.3,
            1 => 0.8,
            2 => 1.1,
            3 => 0.9,
            10 => 1.2,
            12 => 0.7,
            _ => 1.0,
        })
        .collect();
    EdgeWeights::new(c).unwrap()
}

fn relator(c: &mut Criterion) {
    let rep = build_regular_4g_group(2).unwrap();
    c.bench_function("relator evaluation", |b| b.iter(|| evaluate_word(black_box(&rep), rep.relator())));
}

fn inner(c: &mut Criterion) {
    let ms = MarkedSurface::regular(fixtures::octagon_with_center()).unwrap();
    let w = uneven(&ms);
    let f0 = random_positions(ms.complex.n_vertices(), 3, 0.5);
    let opts = SolverOptions::default();
    c.bench_function("inner solve from random start", |b| {
        b.iter(|| solve_harmonic(&ms, &w, &EnergyVariant::Quadratic, black_box(&f0), &opts).unwrap())
    });
}

fn outer(c: &mut Criterion) {
    let ms = MarkedSurface::regular(fixtures::octagon_with_center()).unwrap();
    let w = uneven(&ms);
    let sigma = random_h1_direction(&ms.rep, 0).unwrap();
    let ms = ms.with_rep(deform_rep(&ms.rep, &sigma, 0.05, 1e-9).unwrap()).unwrap();
    let f0 = default_start(&ms, &w, 1e-8);
    let opts = OuterOptions {
        tol_outer: 1e-7,
        ..OuterOptions::default()
    };
    let mut g = c.benchmark_group("outer");
    g.sample_size(20);
    g.bench_function("optimize perturbed octagon", |b| {
        b.iter(|| optimize_metric(ms.clone(), &w, &EnergyVariant::Quadratic, black_box(&f0), &opts).unwrap())
    });
    g.finish();
}

fn certificate(c: &mut Criterion) {
    let fx = fixtures::delaunay_octagon();
    c.bench_function("polar dual and convexity", |b| {
        b.iter(|| {
            let dual = polar_dual(&fx.surface, &fx.positions, black_box(&fx.delta)).unwrap();
            convexity_check(&fx.surface, &fx.positions, &dual, &fx.delta)
        })
    });
}

criterion_group!(benches, relator, inner, outer, certificate);
criterion_main!(benches);
