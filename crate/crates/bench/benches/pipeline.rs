use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use sbt_bench::{six_clause_reduction, toy_assembling, SIX_CLAUSES};
use sbt_core::emit::emit_permutation;
use sbt_core::sat::{guided_collapse, normalize, parse_dimacs, reduce, Assignment};
use sbt_core::search::{collapse_search, exact_distance, SearchConfig};
use sbt_core::Permutation;

fn bench_exact_distance(c: &mut Criterion) {
    let p: Permutation = "0 5 4 3 2 1 6 11 10 9 8 7 12".parse().unwrap();
    c.bench_function("exact_distance/reversal_span_12", |b| {
        b.iter(|| exact_distance(black_box(&p), 16).unwrap())
    });
}

fn bench_collapse_toy(c: &mut Criterion) {
    let assembling = toy_assembling();
    let cfg = SearchConfig::default();
    c.bench_function("collapse_search/toy_span_33", |b| {
        b.iter(|| collapse_search(black_box(&assembling.instance), &cfg).unwrap())
    });
}

fn bench_reduce_and_emit(c: &mut Criterion) {
    c.bench_function("reduce/six_clauses", |b| {
        b.iter(|| {
            let formula = parse_dimacs(black_box(SIX_CLAUSES)).unwrap();
            reduce(&normalize(&formula).unwrap()).unwrap()
        })
    });
    let out = six_clause_reduction();
    c.bench_function("emit_permutation/six_clauses_span_414", |b| {
        b.iter(|| emit_permutation(black_box(&out.assembling)).unwrap())
    });
}

fn bench_guided_collapse(c: &mut Criterion) {
    let out = six_clause_reduction();
    let model = Assignment::from_bits(&[true, false, true, false]);
    c.bench_function("guided_collapse/six_clauses_138_triples", |b| {
        b.iter(|| guided_collapse(black_box(&out), &model).unwrap())
    });
}

fn bench_three_bp_moves(c: &mut Criterion) {
    let out = six_clause_reduction();
    let emitted = emit_permutation(&out.assembling).unwrap();
    c.bench_function("three_bp_moves/emitted_span_414", |b| {
        b.iter(|| black_box(&emitted.permutation).three_bp_moves())
    });
}

criterion_group!(
    benches,
    bench_exact_distance,
    bench_collapse_toy,
    bench_reduce_and_emit,
    bench_guided_collapse,
    bench_three_bp_moves
);
criterion_main!(benches);
