//! Whole-corpus checks on generated data: serialization round trips,
//! blocking against a quadratic oracle, generator rates, and the shape of a
//! trained combiner.

use std::collections::BTreeSet;

use onematch_core::blocking::candidate_pairs;
use onematch_core::combiner::{train_logistic, uniform_sample};
use onematch_core::model::{parse_dataset, parse_truth_set, write_dataset, write_truth_set};
use onematch_core::pipeline::{featurize, labeled_examples};
use onematch_core::synth::generate;
use onematch_core::{
    BlockingOptions, DataFormat, Dataset, FeatureScorer, Optimizer, Side, SynthConfig, SynthCorpus, TokenIndex,
    Tokenizer, TrainConfig,
};

fn corpus(n: usize, seed: u64) -> SynthCorpus {
    generate(&SynthConfig {
        seed,
        n_left: n,
        n_right: n,
        duplicate_rate: 0.1,
        satellite_probability: 0.2,
        ..Default::default()
    })
    .unwrap()
}

fn round_trip(d: &Dataset, format: DataFormat) -> Dataset {
    let mut buf = Vec::new();
    write_dataset(d, format, &mut buf).unwrap();
    parse_dataset(buf.as_slice(), format, d.side(), d.name()).unwrap()
}

#[test]
fn datasets_and_truth_round_trip() {
    let c = corpus(300, 5);
    for format in [DataFormat::Csv, DataFormat::Json] {
        assert_eq!(round_trip(&c.left, format).entities(), c.left.entities());
        assert_eq!(round_trip(&c.right, format).entities(), c.right.entities());
    }
    let mut buf = Vec::new();
    write_truth_set(&c.truth, &c.left, &c.right, &mut buf).unwrap();
    let back = parse_truth_set(buf.as_slice(), &c.left, &c.right).unwrap();
    assert_eq!(back.positives(), c.truth.positives());
    assert_eq!(back.negatives(), c.truth.negatives());
}

#[test]
fn blocking_finds_exactly_the_token_sharing_pairs() {
    let c = corpus(400, 9);
    let tokenizer = Tokenizer::default();
    let tokens = |d: &Dataset| -> Vec<BTreeSet<String>> {
        d.entities().iter().map(|e| e.titles.iter().flat_map(|t| tokenizer.tokens(t)).collect()).collect()
    };
    let (lt, rt) = (tokens(&c.left), tokens(&c.right));
    let mut oracle = Vec::new();
    for (l, a) in lt.iter().enumerate() {
        for (r, b) in rt.iter().enumerate() {
            if !a.is_disjoint(b) {
                oracle.push((l, r));
            }
        }
    }
    let li = TokenIndex::build(&c.left, &tokenizer);
    let ri = TokenIndex::build(&c.right, &tokenizer);
    let found = candidate_pairs(&li, &ri, &BlockingOptions::default());
    assert_eq!(found.pairs, oracle);
    assert!(found.skipped_tokens.is_empty());

    // A cap only ever removes pairs, and names what it removed.
    let capped = candidate_pairs(&li, &ri, &BlockingOptions { max_pairs_per_token: Some(50) });
    assert!(capped.pairs.iter().all(|&(l, r)| found.contains(l, r)));
    assert!(!capped.skipped_tokens.is_empty());
    assert!(capped.len() < found.len());
}

/// `count / trials` within three binomial standard deviations of `p`.
fn within_3_sigma(count: usize, trials: usize, p: f64) -> bool {
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    (count as f64 / trials as f64 - p).abs() <= 3.0 * sigma
}

#[test]
fn generator_rates_match_configuration() {
    let cfg = SynthConfig {
        seed: 21,
        n_left: 2000,
        n_right: 2000,
        duplicate_rate: 0.1,
        satellite_probability: 0.2,
        ..Default::default()
    };
    let c = generate(&cfg).unwrap();
    let s = c.stats;
    assert_eq!(s.shared, cfg.shared_count());
    assert!(within_3_sigma(s.duplicates_left, cfg.n_left, cfg.duplicate_rate));
    assert!(within_3_sigma(s.duplicates_right, cfg.n_right, cfg.duplicate_rate));
    assert!(within_3_sigma(s.satellite_parents, s.shared, cfg.satellite_probability));
    assert_eq!(c.left.len(), cfg.n_left + s.duplicates_left + s.satellite_parents);
    assert_eq!(c.right.len(), cfg.n_right + s.duplicates_right + s.satellite_parents);

    let rows: Vec<_> = c.left.entities().iter().chain(c.right.entities()).collect();
    let n = rows.len();
    let m = cfg.missing;
    assert!(within_3_sigma(rows.iter().filter(|e| e.year.is_none()).count(), n, m.year));
    assert!(within_3_sigma(rows.iter().filter(|e| e.runtime.is_none()).count(), n, m.runtime));
    assert!(within_3_sigma(rows.iter().filter(|e| e.directors.is_empty()).count(), n, m.directors));
    // Cast can also come out empty by dropping every member, so only bound it below.
    assert!(rows.iter().filter(|e| e.cast.is_empty()).count() as f64 / n as f64 >= m.cast - 3.0 * 0.004);

    // Every row of a shared movie has a partner; duplicates add more.
    assert!(c.truth.positives().len() >= s.shared + s.satellite_parents);
}

#[test]
fn combiner_learns_the_expected_signs() {
    let c = corpus(1500, 4);
    let scorer = FeatureScorer::default();
    let candidates = featurize(&c.left, &c.right, &scorer, &BlockingOptions::default());
    let labeled = labeled_examples(&candidates, &c.truth);
    assert_eq!(labeled.len(), candidates.len(), "complete truth labels every candidate");
    let sample = uniform_sample(&labeled, 20_000, 4);
    let model =
        train_logistic(&sample, &TrainConfig { optimizer: Optimizer::Newton, ..Default::default() }).unwrap();
    let [cast, title, year, directors, runtime] = model.weights;
    // Similarities push towards a match, capped differences away from one.
    assert!(cast > 0.0 && title > 0.0 && directors > 0.0, "{:?}", model.weights);
    assert!(year < 0.0 && runtime < 0.0, "{:?}", model.weights);
    assert!(model.intercept < 0.0, "matches are rare among candidates");
}

#[test]
fn sides_are_labelled() {
    let c = corpus(50, 1);
    assert_eq!(c.left.side(), Side::Left);
    assert_eq!(c.right.side(), Side::Right);
    assert!(c.left.entities().iter().all(|e| e.id.starts_with('l')));
}
