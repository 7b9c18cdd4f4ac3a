use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracpoin::domain::rasterize;
use fracpoin::eigen::{smallest_eigenpair, SolverOptions};
use fracpoin::seminorm::stencil::Stencil;
use fracpoin::seminorm::{assemble_regional, restricted_form};
use fracpoin::specfun::{c_ns, reduction_residual};
use fracpoin::{DomainFamily, FracParams, ReductionParams};

fn constants(c: &mut Criterion) {
    c.bench_function("c_ns", |b| b.iter(|| c_ns(FracParams::new(black_box(5), black_box(0.3)).unwrap())));
    c.bench_function("reduction_residual", |b| {
        b.iter(|| reduction_residual(ReductionParams::new(black_box(2), black_box(5), black_box(0.7)).unwrap()))
    });
}

fn stencil(c: &mut Criterion) {
    let mut g = c.benchmark_group("stencil");
    g.sample_size(10);
    for d in [8usize, 16] {
        g.bench_with_input(BenchmarkId::new("2d", d), &d, |b, &d| b.iter(|| Stencil::compute(2, 0.5, [d, d])));
    }
    g.finish();
}

fn matvec(c: &mut Criterion) {
    let mut g = c.benchmark_group("apply");
    for h in [1.0 / 16.0, 1.0 / 32.0] {
        let mask = rasterize(&DomainFamily::strip(4.0), h).unwrap();
        let form = assemble_regional(&mask, FracParams::new(2, 0.5).unwrap()).unwrap();
        let x = vec![1.0; form.len()];
        g.bench_with_input(BenchmarkId::new("strip_regional", form.len()), &x, |b, x| b.iter(|| form.apply(x)));
    }
    g.finish();
}

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigen");
    g.sample_size(10);
    let interval = rasterize(&DomainFamily::interval(-1.0, 1.0), 1.0 / 256.0).unwrap();
    let form = assemble_regional(&interval, FracParams::new(1, 0.75).unwrap()).unwrap();
    g.bench_function("interval_regional_h256", |b| b.iter(|| smallest_eigenpair(&form, &SolverOptions::default()).unwrap()));
    let square = rasterize(&DomainFamily::Box { lo: [0.0, 0.0], hi: [1.0, 1.0] }, 1.0 / 16.0).unwrap();
    let form = restricted_form(&square, FracParams::new(2, 0.5).unwrap()).unwrap();
    g.bench_function("square_restricted_h16", |b| b.iter(|| smallest_eigenpair(&form, &SolverOptions::default()).unwrap()));
    g.finish();
}

criterion_group!(benches, constants, stencil, matvec, eigen);
criterion_main!(benches);
