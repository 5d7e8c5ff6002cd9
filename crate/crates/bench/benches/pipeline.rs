use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use rsfkit_core::equiv;
use rsfkit_core::gen::Gen;
use rsfkit_core::host::Val;
use rsfkit_core::programs::{delay, naturals};
use rsfkit_core::rewrite::{collapse, normalize, translate};
use rsfkit_core::yampa;

fn bench_run_naturals(c: &mut Criterion) {
    let program = naturals();
    let rows: Vec<Vec<Val>> = (0..1000).map(|_| vec![]).collect();
    c.bench_function("run_naturals_1000_steps", |b| {
        b.iter(|| black_box(program.run(black_box(&rows)).unwrap()))
    });
}

fn bench_normalize_generated(c: &mut Criterion) {
    let mut gen = Gen::new(0xbe9c);
    let terms: Vec<_> = (0..50)
        .map(|_| {
            let input = gen.ty(1);
            let pool = gen.ref_pool(3);
            gen.rsf_any(&input, &pool, 4).0
        })
        .collect();
    c.bench_function("normalize_50_generated_terms", |b| {
        b.iter(|| {
            for t in &terms {
                black_box(normalize(black_box(t)));
            }
        })
    });
}

fn bench_translate_pipeline(c: &mut Criterion) {
    let program = delay();
    c.bench_function("collapse_and_translate_delay", |b| {
        b.iter(|| {
            let collapsed = collapse(black_box(&program)).unwrap();
            black_box(translate(&collapsed).unwrap())
        })
    });
}

fn bench_translated_run(c: &mut Criterion) {
    let term = translate(&collapse(&naturals()).unwrap()).unwrap();
    let inputs: Vec<Val> = (0..1000).map(|_| Val::Tt).collect();
    c.bench_function("run_translated_naturals_1000_steps", |b| {
        b.iter(|| black_box(term.run(black_box(&inputs)).unwrap()))
    });
}

fn bench_bisim_delay(c: &mut Criterion) {
    let t = yampa::SfTerm::feedback(
        Val::nat(0),
        yampa::SfTerm::Arr(rsfkit_core::host::HostFn::Swap),
    );
    let (v, f) = yampa::normalize(&t);
    let nf = yampa::SfTerm::feedback(v, yampa::SfTerm::Arr(f));
    c.bench_function("bisim_delay_vs_normal_form", |b| {
        b.iter(|| {
            black_box(
                yampa::bisim(&t, &nf, &rsfkit_core::host::Ty::Nat, 100, 10, 0xb1).unwrap(),
            )
        })
    });
}

fn bench_law_suite(c: &mut Criterion) {
    c.bench_function("law_suite_5_samples", |b| {
        b.iter(|| black_box(equiv::law_suite(5, 0xbe9d)))
    });
}

criterion_group!(
    benches,
    bench_run_naturals,
    bench_normalize_generated,
    bench_translate_pipeline,
    bench_translated_run,
    bench_bisim_delay,
    bench_law_suite
);
criterion_main!(benches);
