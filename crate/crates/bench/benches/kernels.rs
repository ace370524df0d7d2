use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use jlm_core::mechsys::{integrate, sho_system, symmetry_catalog};
use jlm_core::multiplier::{enumerate_pairs, phase_sampler};
use jlm_core::pdesolve::{build_ladder, fd_spectrum, gauge_catalog, standard_catalog};
use jlm_core::quantize::{quantize, ClassicalHamiltonianForm, Scheme};
use jlm_core::symkernel::{parse_prefix, to_prefix, DEFAULT_SEED};
use jlm_core::{Bindings, Expr};

fn symbolic(c: &mut Criterion) {
    let e = parse_prefix(
        "(* (+ (* 4 (^ x 2)) -2) (exp (+ (* (complex 0 -2.5) t) (* -0.5 (^ x 2)) (* (complex 0 1) t x))))",
    )
    .unwrap();
    c.bench_function("diff_xx", |b| b.iter(|| black_box(&e).diff("x").diff("x")));
    let b0 = Bindings::new().with("x", 0.7).with("t", 0.3);
    c.bench_function("eval", |b| b.iter(|| black_box(&e).eval(&b0).unwrap()));
    let s = to_prefix(&e);
    c.bench_function("parse_prefix", |b| b.iter(|| parse_prefix(black_box(&s)).unwrap()));
}

fn classical(c: &mut Criterion) {
    let sys = sho_system(1.0).unwrap();
    c.bench_function("rk4_span_10", |b| {
        b.iter(|| integrate(&sys, [1.0, 0.5], (0.0, 10.0), 1e-3).unwrap())
    });
    let cat = symmetry_catalog(1.0).unwrap();
    let sampler = phase_sampler(DEFAULT_SEED);
    c.bench_function("enumerate_pairs", |b| {
        b.iter(|| enumerate_pairs(&sys, &cat, &sampler).unwrap())
    });
}

fn quantum(c: &mut Criterion) {
    let h = ClassicalHamiltonianForm::goldstein();
    c.bench_function("quantize_weyl", |b| {
        b.iter(|| quantize(&h, Scheme::Weyl, DEFAULT_SEED).unwrap())
    });
    let cat = gauge_catalog(1.0, &Expr::zero()).unwrap();
    c.bench_function("ladder_n2", |b| b.iter(|| build_ladder(&cat, 2, DEFAULT_SEED).unwrap()));
    let op = standard_catalog().operator;
    c.bench_function("fd_spectrum_2000", |b| {
        b.iter(|| fd_spectrum(&op, (-10.0, 10.0), 2000, 5).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = symbolic, classical, quantum
}
criterion_main!(benches);
