use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dpflab_core::numerics::{solve_dare, solve_filter_dare, spectral_radius};
use dpflab_core::stabilizability::is_stabilizable_without_dpf;
use dpflab_core::{delay_chain_plant, scalar_delay_gains, DelaySpec, Matrix};
use std::hint::black_box;

fn dare(c: &mut Criterion) {
    let mut group = c.benchmark_group("dare");
    for n in [2, 4, 8] {
        let a = Matrix::from_fn(n, n, |i, j| if i == j { 1.05 } else if j == i + 1 { 0.3 } else { 0.0 });
        let b = Matrix::identity(n, n);
        let q = Matrix::identity(n, n);
        group.bench_with_input(BenchmarkId::new("control", n), &n, |bench, _| {
            bench.iter(|| solve_dare(black_box(&a), &b, &q, &q).unwrap())
        });
    }
    for td in [1, 3, 6] {
        let lp = delay_chain_plant(&DelaySpec::new(td, 1.2, 1.0, 1.0)).unwrap();
        let p = lp.plant;
        group.bench_with_input(BenchmarkId::new("filter_delay_chain", td), &td, |bench, _| {
            bench.iter(|| solve_filter_dare(black_box(&p.a), &p.c, &p.w, &p.v).unwrap())
        });
    }
    group.finish();
}

fn closed_form(c: &mut Criterion) {
    c.bench_function("scalar_delay_gains", |b| {
        b.iter(|| scalar_delay_gains(black_box(1.3), black_box(0.7), black_box(2.0)).unwrap())
    });
}

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_radius");
    for n in [3, 10, 30] {
        let m = Matrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.5);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| spectral_radius(black_box(&m)).unwrap()));
    }
    group.finish();
}

fn stabilizability(c: &mut Criterion) {
    let mut group = c.benchmark_group("no_dpf_search");
    group.sample_size(10);
    for td in [1, 4] {
        group.bench_with_input(BenchmarkId::from_parameter(td), &td, |b, &td| {
            b.iter(|| is_stabilizable_without_dpf(black_box(1.2), td).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, dare, closed_form, eigen, stabilizability);
criterion_main!(benches);
