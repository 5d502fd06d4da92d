use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use trispec_bench::fixtures;
use trispec_core::certifier::{
    default_exclusions, default_region, rho5_certificate_for, CertOptions, TypeTuple, VertexMode,
};
use trispec_core::combinatorics::build_star_ball;
use trispec_core::spectrum::{brute_force_head, predicted_head, BruteOptions};
use trispec_core::Signature;

fn heads(c: &mut Criterion) {
    let sigs = fixtures();
    c.bench_function("predicted_head/fixtures", |b| {
        b.iter(|| {
            for s in &sigs {
                black_box(predicted_head(s).unwrap());
            }
        })
    });
    let s = Signature::finite(4, 5, 6).unwrap();
    let cutoff = predicted_head(&s).unwrap().cutoff + 1e-6;
    let opts = BruteOptions::new(cutoff, 12, 10);
    c.bench_function("brute_force_head/(4,5,6)", |b| {
        b.iter(|| black_box(brute_force_head(&s, &opts).unwrap()))
    });
}

fn star(c: &mut Criterion) {
    let s = Signature::finite(3, 3, 6).unwrap();
    c.bench_function("star_ball/(3,3,6) radius 5", |b| {
        b.iter(|| black_box(build_star_ball(&s, 5).unwrap()))
    });
}

fn certify(c: &mut Criterion) {
    let region = default_region(1e-3);
    let ex = default_exclusions();
    let opts = CertOptions::default();
    let t = [TypeTuple::parse("rrrrp").unwrap()];
    let mut g = c.benchmark_group("certify");
    g.sample_size(10);
    g.bench_function("rho5/(r,r,r,r,p)", |b| {
        b.iter(|| {
            black_box(rho5_certificate_for(
                &t,
                &region,
                VertexMode::Geodesic,
                &ex,
                &opts,
            ))
        })
    });
    g.finish();
}

criterion_group!(benches, heads, star, certify);
criterion_main!(benches);
