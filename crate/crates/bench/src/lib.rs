//! Shared fixtures for the benchmarks: a synthetic corpus at a given size,
//! its featurized candidates, and the scored graph a trained model yields.

use onematch_core::combiner::{train_logistic, uniform_sample, LabeledExample};
use onematch_core::pipeline::{featurize, labeled_examples, scored_graph, CandidateFeatures};
use onematch_core::synth::generate;
use onematch_core::{BlockingOptions, FeatureScorer, Optimizer, ScoredGraph, SynthConfig, SynthCorpus, TrainConfig};

pub struct Fixture {
    pub corpus: SynthCorpus,
    pub candidates: Vec<CandidateFeatures>,
    pub labeled: Vec<LabeledExample>,
    pub graph: ScoredGraph,
}

pub fn corpus(n: usize) -> SynthCorpus {
    generate(&SynthConfig {
        seed: 17,
        n_left: n,
        n_right: n,
        duplicate_rate: 0.05,
        satellite_probability: 0.1,
        ..Default::default()
    })
    .expect("valid synth config")
}

pub fn fixture(n: usize) -> Fixture {
    let corpus = corpus(n);
    let candidates = featurize(&corpus.left, &corpus.right, &FeatureScorer::default(), &BlockingOptions::default());
    let labeled = labeled_examples(&candidates, &corpus.truth);
    let config = TrainConfig { optimizer: Optimizer::Newton, ..Default::default() };
    let model = train_logistic(&uniform_sample(&labeled, 20_000, 17), &config).expect("trainable fixture");
    let graph = scored_graph(corpus.left.len(), corpus.right.len(), &candidates, &model).expect("valid graph");
    Fixture { corpus, candidates, labeled, graph }
}
