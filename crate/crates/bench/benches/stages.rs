use std::hint::black_box;
use std::io::Cursor;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use ecomigrate_bench::{ingest, scenario};
use ecomigrate_core::centrality::{analysis_months, graph_at_month, monthly_series, pagerank_scores, CentralityScope, PageRankParams};
use ecomigrate_core::events::change_sets;
use ecomigrate_core::mining::{mine_patterns, MinerConfig};
use ecomigrate_core::registry::{ingest_snapshot, IngestOptions};
use ecomigrate_core::trend::mann_kendall;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bench_ingest_and_events(c: &mut Criterion) {
    let s = scenario(7, 2_000);
    let options = IngestOptions::new(s.truth.cutoff);
    let mut group = c.benchmark_group("ingest");
    group.sample_size(10);
    group.bench_function("ingest 2k packages", |b| {
        b.iter(|| ingest_snapshot(Cursor::new(black_box(s.registry.as_bytes())), &options).unwrap())
    });
    let snapshot = ingest(&s);
    group.bench_function("change sets 2k packages", |b| b.iter(|| change_sets(black_box(&snapshot))));
    let sets = change_sets(&snapshot);
    let config = MinerConfig::default();
    group.bench_function("mine 2k packages", |b| b.iter(|| mine_patterns(black_box(&sets), &config).unwrap()));
    group.finish();
}

fn bench_pagerank(c: &mut Criterion) {
    let s = scenario(7, 2_000);
    let snapshot = ingest(&s);
    let params = PageRankParams::default();
    let last = *analysis_months(&snapshot).last().unwrap();
    let graph = graph_at_month(&snapshot, last, CentralityScope::Both);
    let mut group = c.benchmark_group("pagerank");
    group.bench_function("single month 2k packages", |b| b.iter(|| pagerank_scores(black_box(&graph), &params).unwrap()));
    group.sample_size(10);
    group.bench_function("monthly series 2k packages", |b| {
        b.iter(|| monthly_series(black_box(&snapshot), &params, CentralityScope::Both).unwrap())
    });
    group.finish();
}

fn bench_mann_kendall(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut group = c.benchmark_group("mann_kendall");
    for n in [8usize, 10, 36] {
        group.bench_function(format!("n = {n}"), |b| {
            b.iter_batched(
                || (0..n).map(|_| rng.gen_range(0.0..1.0)).collect::<Vec<f64>>(),
                |series| mann_kendall(&series).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, bench_ingest_and_events, bench_pagerank, bench_mann_kendall);
criterion_main!(benches);
