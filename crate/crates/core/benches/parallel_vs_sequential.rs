//! Quadrature-heavy kernels on a single-thread pool against the default pool.
//! Build with `--no-default-features` to time the rayon-free fallback instead.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pierced::expansion::verify_expansion;
use pierced::identities::representation_identity_4;
use pierced::Dimension;

fn pools() -> [(&'static str, rayon::ThreadPool); 2] {
    [
        ("sequential", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", rayon::ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn identity(c: &mut Criterion) {
    let dim = Dimension::new(5).unwrap();
    let tau = [0.3, 0.0, 0.0, 0.0, 0.0];
    let mut g = c.benchmark_group("representation_identity_4");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(name, |b| b.iter(|| pool.install(|| representation_identity_4(dim, black_box(&tau)).unwrap())));
    }
    g.finish();
}

fn expansion(c: &mut Criterion) {
    let dim = Dimension::new(5).unwrap();
    let mut g = c.benchmark_group("verify_expansion");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(name, |b| b.iter(|| pool.install(|| verify_expansion(dim, black_box(&[0.1, 0.05, 0.02, 0.01]), 1.88, 1000).unwrap())));
    }
    g.finish();
}

criterion_group!(benches, identity, expansion);
criterion_main!(benches);
