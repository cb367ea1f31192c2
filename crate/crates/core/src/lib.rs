//! One-to-one entity resolution between two datasets: token blocking,
//! pairwise feature scores, a logistic combiner, constrained matchers and
//! precision/recall with inferred false positives.

pub mod blocking;
pub mod combiner;
pub mod error;
pub mod eval;
pub mod features;
pub mod matchers;
pub mod model;
pub mod pipeline;
pub mod synth;

pub use blocking::{BlockingOptions, CandidatePairSet, TokenIndex, Tokenizer};
pub use combiner::{LabeledExample, LogisticModel, Optimizer, Standardizer, TrainConfig, TrainingSummary};
pub use error::{Error, Result};
pub use eval::{count_outcomes, pr_curve, FpCounting, OutcomeCounts, PrPoint};
pub use features::{FeatureParams, FeatureScorer, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
pub use matchers::{Algorithm, Direction, Edge, MatcherConfig, ScoredGraph};
pub use model::{DataFormat, Dataset, Entity, MatchedPair, Matching, Negatives, Side, TruthSet};
pub use synth::{SynthConfig, SynthCorpus};
