use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use octic_core::basis::{basis_discriminant, known_basis};
use octic_core::index_form::{build_s_factors, extract_q_factors};
use octic_core::oracle::direct_index;
use octic_core::polyring::{constancy_mod, IntPolynomial};
use octic_core::CaseTag;

fn poly_mul(c: &mut Criterion) {
    let a: IntPolynomial = "(x2 + 2*x3 - x5*n + 3)^4".parse().unwrap();
    let b: IntPolynomial = "(x6 - x7 + n^2 + 1)^4".parse().unwrap();
    c.bench_function("poly_mul", |bench| bench.iter(|| black_box(&a) * black_box(&b)));
}

fn discriminant(c: &mut Criterion) {
    let basis = known_basis(CaseTag::CaseII);
    c.bench_function("basis_discriminant", |bench| bench.iter(|| basis_discriminant(black_box(&basis))));
}

fn factors(c: &mut Criterion) {
    let mut group = c.benchmark_group("factors");
    group.sample_size(10);
    for case in CaseTag::all() {
        group.bench_function(format!("build_s_factors {}", case.residue()), |bench| {
            bench.iter(|| build_s_factors(black_box(case)).unwrap())
        });
    }
    group.finish();
}

fn constancy(c: &mut Criterion) {
    let q = extract_q_factors(&build_s_factors(CaseTag::CaseII).unwrap()).unwrap();
    let q1 = q.get(1).clone();
    c.bench_function("constancy_mod Q1 mod 16", |bench| bench.iter(|| constancy_mod(black_box(&q1), 4)));
}

fn oracle(c: &mut Criterion) {
    c.bench_function("direct_index m=7", |bench| {
        bench.iter(|| direct_index(7, black_box(&[1, 2, -1, 0, 3, 1, -2, 1])).unwrap())
    });
}

criterion_group!(benches, poly_mul, discriminant, factors, constancy, oracle);
criterion_main!(benches);
