use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use nesim_bench::twenty_firm_fixture;
use nesim_core::presets::ring20_graph;
use nesim_core::{run, step, step_vectorized, StoppingRule};

fn bench_single_step(c: &mut Criterion) {
    let (game, graph, params, state) = twenty_firm_fixture();
    let mut group = c.benchmark_group("step-n20");
    group.bench_function("per-agent", |b| {
        b.iter(|| step(black_box(&state), &game, &graph, &params).unwrap())
    });
    group.bench_function("vectorized", |b| {
        b.iter(|| step_vectorized(black_box(&state), &game, &graph, &params).unwrap())
    });
    group.finish();
}

fn bench_run_segment(c: &mut Criterion) {
    let (game, graph, params, state) = twenty_firm_fixture();
    let stop = StoppingRule { tol: 0.0, max_iterations: 100, record_every: 100 };
    c.bench_function("run-100-iterations-n20", |b| {
        b.iter(|| run(&game, &graph, &params, black_box(state.clone()), stop).unwrap())
    });
}

fn bench_graph_spectrum(c: &mut Criterion) {
    c.bench_function("laplacian-spectrum-n20", |b| {
        b.iter(|| black_box(ring20_graph()).algebraic_connectivity())
    });
}

criterion_group!(benches, bench_single_step, bench_run_segment, bench_graph_spectrum);
criterion_main!(benches);
