use std::collections::BTreeSet;
use std::hint::black_box;

use brickgen_bench::{tokenize, Prepared};
use brickgen_core::fixtures;
use brickgen_core::matcher::{jaccard, match_corpus};
use brickgen_core::rdf::{parse_turtle, serialize_turtle};
use brickgen_core::{MatchConfig, ModuleToggles};
use criterion::{criterion_group, criterion_main, Criterion};

fn matching(c: &mut Criterion) {
    let corpus = Prepared::corpus();
    c.bench_function("tokenize_corpus", |b| b.iter(|| tokenize(black_box(&corpus.list), &corpus.registry)));
    c.bench_function("match_corpus", |b| {
        b.iter(|| match_corpus(black_box(&corpus.points), &corpus.taxonomy, MatchConfig::default()))
    });
    let a: BTreeSet<&str> = ["locker", "room", "library", "on", "off", "status"].into();
    let z: BTreeSet<&str> = ["on", "off", "status"].into();
    c.bench_function("jaccard", |b| b.iter(|| jaccard(black_box(&a), black_box(&z))));
}

fn building(c: &mut Criterion) {
    let ftc = Prepared::ftc();
    let mut cfg = fixtures::ftc_build_config();
    c.bench_function("build_model_ftc", |b| b.iter(|| ftc.build(black_box(&cfg))));
    cfg.toggles = "point_connection".parse::<ModuleToggles>().unwrap();
    c.bench_function("build_model_ftc_points_only", |b| b.iter(|| ftc.build(black_box(&cfg))));

    let graph = ftc.build(&fixtures::ftc_build_config()).graph;
    let text = serialize_turtle(&graph);
    c.bench_function("serialize_turtle", |b| b.iter(|| serialize_turtle(black_box(&graph))));
    c.bench_function("parse_turtle", |b| b.iter(|| parse_turtle(black_box(&text)).unwrap()));
}

criterion_group!(benches, matching, building);
criterion_main!(benches);
