use std::hint::black_box;
use std::time::Duration;

use arczero::eisenstein::{eval_f_many, head_bound, NormTable, Precision};
use arczero::forms::{epsilon_on_arc, uniform_grid, ArcEvaluator, CoefficientFamily, Truncation};
use arczero::zeros::{isolate_zeros, ZeroOptions};
use arczero::{Execution, ARC_HI, ARC_LO};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn head(c: &mut Criterion) {
    let mut g = c.benchmark_group("head_bound");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, "k4_A1e5"), &exec, |b, &e| {
            b.iter(|| head_bound(black_box(4), 100_000, Precision::Extended, e))
        });
        g.bench_with_input(BenchmarkId::new(name, "k6_A536"), &exec, |b, &e| {
            b.iter(|| head_bound(black_box(6), 536, Precision::Extended, e))
        });
    }
    g.finish();
}

fn grid_eval(c: &mut Criterion) {
    let table = NormTable::new(10_000);
    let thetas = uniform_grid(ARC_LO, ARC_HI, 1024);
    let mut g = c.benchmark_group("f4_grid_1024");
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| eval_f_many(&table, 4, black_box(&thetas), exec).unwrap()));
    }
    g.finish();
}

fn epsilon(c: &mut Criterion) {
    let mut g = c.benchmark_group("epsilon_res512");
    g.sample_size(10).measurement_time(Duration::from_secs(10));
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| epsilon_on_arc(black_box(512), 10_000, exec).unwrap()));
    }
    g.finish();
}

fn zeros(c: &mut Criterion) {
    let ev = ArcEvaluator::new(Truncation::default());
    let fam = CoefficientFamily::zero();
    let mut g = c.benchmark_group("zeros_k240");
    for (name, exec) in MODES {
        let opts = ZeroOptions { exec, ..ZeroOptions::default() };
        g.bench_function(name, |b| b.iter(|| isolate_zeros(&ev, black_box(240), &fam, 1.0, &opts).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, head, grid_eval, epsilon, zeros);
criterion_main!(benches);
