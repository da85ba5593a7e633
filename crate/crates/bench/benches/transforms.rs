use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wignerlab::poly_lemma::InstanceMode;
use wignerlab::symplectic::{dilation, shear};
use wignerlab::{
    apply_map, classify_pair, hermite, kernel_from_phase_space, make_grid, metaplectic_apply, random_instance,
    standard_j, wigner, GridSpec, MapSpec,
};

fn grid(points: usize) -> GridSpec {
    make_grid(1, points, 1.0 / (points as f64).sqrt()).unwrap()
}

fn bench_wigner(c: &mut Criterion) {
    let mut group = c.benchmark_group("wigner");
    for points in [64, 128, 256] {
        let g = grid(points);
        let f = hermite(&g, 3).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(points), &f, |b, f| {
            b.iter(|| wigner(black_box(f), black_box(f)).unwrap())
        });
    }
    group.finish();
}

fn bench_kernel_eigenvalues(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_eigenvalues");
    group.sample_size(10);
    for points in [64, 128] {
        let g = grid(points);
        let f = hermite(&g, 1).unwrap();
        let w = wigner(&f, &f).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(points), &w, |b, w| {
            b.iter(|| kernel_from_phase_space(black_box(w)).operator_eigenvalues())
        });
    }
    group.finish();
}

fn bench_apply_map(c: &mut Criterion) {
    let g = grid(128);
    let f = hermite(&g, 0).unwrap();
    let w = wigner(&f, &f).unwrap();
    let mut group = c.benchmark_group("apply_map");
    group.sample_size(20);
    let maps = [
        ("J", MapSpec::linear(standard_j(1))),
        ("shear", MapSpec::linear(shear(1, 0.5))),
        ("poly_shear", MapSpec::poly_shear(0.5)),
    ];
    for (name, m) in &maps {
        group.bench_function(*name, |b| b.iter(|| apply_map(black_box(m), black_box(&w)).unwrap()));
    }
    group.finish();
}

fn bench_metaplectic(c: &mut Criterion) {
    let g = grid(256);
    let f = hermite(&g, 2).unwrap();
    let s = shear(1, 0.3).mul(&standard_j(1)).mul(&dilation(1, 1.2));
    c.bench_function("metaplectic_apply/256", |b| {
        b.iter(|| metaplectic_apply(black_box(&s), black_box(&f)).unwrap())
    });
}

fn bench_polylemma(c: &mut Criterion) {
    let triples: Vec<_> = (0..32).map(|s| random_instance(s, InstanceMode::FromB, 3)).collect();
    c.bench_function("classify_pair/32x3vars", |b| {
        b.iter(|| {
            for (f, g, h) in &triples {
                black_box(classify_pair(f, g, h));
            }
        })
    });
}

criterion_group!(
    benches,
    bench_wigner,
    bench_kernel_eigenvalues,
    bench_apply_map,
    bench_metaplectic,
    bench_polylemma
);
criterion_main!(benches);
