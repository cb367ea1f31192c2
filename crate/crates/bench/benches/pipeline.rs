use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use onematch_bench::{corpus, fixture};
use onematch_core::blocking::candidate_pairs;
use onematch_core::combiner::{train_logistic, uniform_sample};
use onematch_core::matchers::{greedy, max_weight};
use onematch_core::{BlockingOptions, Optimizer, TokenIndex, Tokenizer, TrainConfig};

fn blocking(c: &mut Criterion) {
    let mut group = c.benchmark_group("blocking");
    let tokenizer = Tokenizer::default();
    for n in [1_000, 5_000] {
        let corpus = corpus(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &corpus, |b, corpus| {
            b.iter(|| {
                let li = TokenIndex::build(&corpus.left, &tokenizer);
                let ri = TokenIndex::build(&corpus.right, &tokenizer);
                black_box(candidate_pairs(&li, &ri, &BlockingOptions::default()))
            })
        });
    }
    group.finish();
}

fn matchers(c: &mut Criterion) {
    let mut group = c.benchmark_group("matchers");
    group.sample_size(20);
    for n in [1_000, 3_000] {
        let f = fixture(n);
        for theta in [0.1, 0.5] {
            let id = format!("{n}@{theta}");
            group.bench_with_input(BenchmarkId::new("greedy", &id), &f.graph, |b, g| {
                b.iter(|| black_box(greedy(g, theta)))
            });
            group.bench_with_input(BenchmarkId::new("max-weight", &id), &f.graph, |b, g| {
                b.iter(|| black_box(max_weight(g, theta).unwrap()))
            });
        }
    }
    group.finish();
}

fn training(c: &mut Criterion) {
    let mut group = c.benchmark_group("training");
    group.sample_size(10);
    let f = fixture(2_000);
    let sample = uniform_sample(&f.labeled, 20_000, 3);
    for optimizer in [Optimizer::Newton, Optimizer::GradientAscent] {
        let config = TrainConfig { optimizer, max_iters: 2_000, ..Default::default() };
        group.bench_function(format!("{optimizer:?}"), |b| b.iter(|| black_box(train_logistic(&sample, &config).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, blocking, matchers, training);
criterion_main!(benches);
