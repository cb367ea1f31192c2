//! Glue between the stages: block, compute feature vectors, label, combine.

use rayon::prelude::*;

use crate::blocking::{candidate_pairs, BlockingOptions, TokenIndex};
use crate::combiner::{LabeledExample, LogisticModel};
use crate::error::Result;
use crate::features::{FeatureScorer, FeatureVector};
use crate::matchers::{Edge, ScoredGraph};
use crate::model::{Dataset, TruthSet};

/// A candidate pair with its feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateFeatures {
    pub left: usize,
    pub right: usize,
    pub features: FeatureVector,
}

/// Blocks the two datasets and computes a feature vector for every
/// candidate pair. Output order follows the sorted candidate pairs.
pub fn featurize(
    left: &Dataset,
    right: &Dataset,
    scorer: &FeatureScorer,
    blocking: &BlockingOptions,
) -> Vec<CandidateFeatures> {
    let li = TokenIndex::build(left, &scorer.tokenizer);
    let ri = TokenIndex::build(right, &scorer.tokenizer);
    let pairs = candidate_pairs(&li, &ri, blocking);
    let lp = scorer.prepare_all(left.entities());
    let rp = scorer.prepare_all(right.entities());
    pairs
        .pairs
        .par_iter()
        .map(|&(l, r)| CandidateFeatures { left: l, right: r, features: scorer.score_prepared(&lp[l], &rp[r]) })
        .collect()
}

/// Candidates the truth set labels, as training examples.
pub fn labeled_examples(candidates: &[CandidateFeatures], truth: &TruthSet) -> Vec<LabeledExample> {
    candidates
        .iter()
        .filter_map(|c| {
            if truth.is_positive(c.left, c.right) {
                Some(LabeledExample::new(c.features, true))
            } else if truth.is_negative(c.left, c.right) {
                Some(LabeledExample::new(c.features, false))
            } else {
                None
            }
        })
        .collect()
}

/// Combines every candidate's features into a score and builds the graph.
pub fn scored_graph(
    left_len: usize,
    right_len: usize,
    candidates: &[CandidateFeatures],
    model: &LogisticModel,
) -> Result<ScoredGraph> {
    let edges = candidates
        .par_iter()
        .map(|c| Edge { left: c.left, right: c.right, score: model.predict(&c.features) })
        .collect();
    ScoredGraph::new(left_len, right_len, edges)
}
