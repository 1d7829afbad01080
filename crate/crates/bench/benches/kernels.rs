use criterion::{black_box, criterion_group, criterion_main, Criterion};
use heegner::halfint::basis;
use heegner::hauptmodul::{evaluate_cm, qexp};
use heegner::jacobi::phi;
use heegner::qseries::{delta, eisenstein};
use heegner::quadforms::gamma0_classes;
use heegner::traces::twisted_trace;

fn series(c: &mut Criterion) {
    let e4 = eisenstein(4, 400).unwrap();
    let d = delta(400);
    c.bench_function("series mul 400", |b| b.iter(|| black_box(&e4).mul(black_box(&d)).unwrap()));
    c.bench_function("series inverse 400", |b| b.iter(|| black_box(&d).inverse().unwrap()));
}

fn forms(c: &mut Criterion) {
    let mut g = c.benchmark_group("forms");
    g.sample_size(10);
    g.bench_function("basis(3, 11, 140)", |b| b.iter(|| basis(3, black_box(11), 140).unwrap()));
    g.bench_function("phi(13, 3, 10)", |b| b.iter(|| phi(black_box(13), 3, 10).unwrap()));
    g.finish();
}

fn numerics(c: &mut Criterion) {
    let h = qexp(3, 140).unwrap();
    let reps = gamma0_classes(39, 3, 3).unwrap();
    c.bench_function("evaluate_cm 256 bits", |b| b.iter(|| evaluate_cm(&h, black_box(&reps[0]), 256).unwrap()));
    let mut g = c.benchmark_group("traces");
    g.sample_size(10);
    g.bench_function("twisted_trace(3, 21, 8)", |b| b.iter(|| twisted_trace(3, 21, black_box(8), 256).unwrap()));
    g.finish();
}

criterion_group!(benches, series, forms, numerics);
criterion_main!(benches);
