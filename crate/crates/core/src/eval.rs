//! Precision/recall with inferred false positives, threshold sweeps and the
//! within-dataset duplicate scan.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocking::{self_candidate_pairs, BlockingOptions, TokenIndex};
use crate::combiner::LogisticModel;
use crate::error::{Error, Result};
use crate::features::FeatureScorer;
use crate::matchers::{run, Algorithm, MatcherConfig, ScoredGraph};
use crate::model::{Dataset, Matching, TruthSet};

/// How false positives that qualify under several kinds are counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FpCounting {
    /// Sum of the three kinds; one pair may count up to three times.
    #[default]
    Literal,
    /// Each predicted pair counts at most once.
    Deduplicated,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    /// Predicted pairs labeled negative in the truth set.
    pub fp_truth_negative: usize,
    /// Predicted pairs whose left entity is a known positive with someone else.
    pub fp_left_inferred: usize,
    /// Predicted pairs whose right entity is a known positive with someone else.
    pub fp_right_inferred: usize,
}

impl OutcomeCounts {
    /// `tp / (tp + fp)`, with 0/0 = 1.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// `tp / (tp + fn)`, with 0/0 = 1.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Counts true positives, false negatives and the three kinds of false
/// positive of a matching against a truth set.
pub fn count_outcomes(matching: &Matching, truth: &TruthSet, counting: FpCounting) -> Result<OutcomeCounts> {
    for p in matching.pairs() {
        if p.left >= truth.left_len() {
            return Err(Error::DanglingReference(format!("left handle {}", p.left)));
        }
        if p.right >= truth.right_len() {
            return Err(Error::DanglingReference(format!("right handle {}", p.right)));
        }
    }
    // Truth partners per endpoint.
    let mut left_partners: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut right_partners: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(l, r) in truth.positives() {
        left_partners.entry(l).or_default().push(r);
        right_partners.entry(r).or_default().push(l);
    }

    let mut counts = OutcomeCounts::default();
    for p in matching.pairs() {
        let (x, y) = (p.left, p.right);
        if truth.is_positive(x, y) {
            counts.tp += 1;
        }
        let negative = truth.is_negative(x, y);
        let left_inferred = left_partners.get(&x).is_some_and(|zs| zs.iter().any(|&z| z != y));
        let right_inferred = right_partners.get(&y).is_some_and(|zs| zs.iter().any(|&z| z != x));
        counts.fp_truth_negative += negative as usize;
        counts.fp_left_inferred += left_inferred as usize;
        counts.fp_right_inferred += right_inferred as usize;
        counts.fp += match counting {
            FpCounting::Literal => negative as usize + left_inferred as usize + right_inferred as usize,
            FpCounting::Deduplicated => (negative || left_inferred || right_inferred) as usize,
        };
    }
    counts.fn_ = truth.positives().len() - counts.tp;
    Ok(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub theta: f64,
    pub counts: OutcomeCounts,
    pub precision: f64,
    pub recall: f64,
    pub weight: f64,
    pub size: usize,
}

/// `0.00, 0.01, …, 1.00`.
pub fn default_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

/// Every distinct edge score, ascending.
pub fn score_grid(graph: &ScoredGraph) -> Vec<f64> {
    graph.distinct_scores()
}

/// Runs `algorithm` at every threshold and evaluates each result. Points
/// come back ordered by θ ascending.
pub fn pr_curve(
    graph: &ScoredGraph,
    algorithm: Algorithm,
    truth: &TruthSet,
    thresholds: &[f64],
    config: &MatcherConfig,
    counting: FpCounting,
) -> Result<Vec<PrPoint>> {
    if thresholds.is_empty() {
        return Err(Error::Config("threshold grid is empty".into()));
    }
    if let Some(bad) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::Config(format!("threshold {bad} outside [0, 1]")));
    }
    let mut grid = thresholds.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid.par_iter()
        .map(|&theta| {
            let m = run(algorithm, graph, theta, config)?;
            let counts = count_outcomes(&m, truth, counting)?;
            Ok(PrPoint {
                theta,
                counts,
                precision: counts.precision(),
                recall: counts.recall(),
                weight: m.weight(),
                size: m.len(),
            })
        })
        .collect()
}

/// One within-dataset pair, `first < second`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub rank: usize,
    pub first: usize,
    pub second: usize,
    pub score: f64,
}

/// Which ranks of a duplicate scan to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    /// Report every `stride`-th rank, starting at rank 0.
    pub stride: usize,
    /// Stop after this many reported entries.
    pub limit: Option<usize>,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { stride: 1, limit: None }
    }
}

/// Scores every blocked pair within one dataset and ranks them, highest
/// score first (ties by handle), then samples the ranking.
pub fn self_duplicate_scan(
    dataset: &Dataset,
    scorer: &FeatureScorer,
    model: &LogisticModel,
    blocking: &BlockingOptions,
    sample: &SampleSpec,
) -> Vec<ScanEntry> {
    let index = TokenIndex::build(dataset, &scorer.tokenizer);
    let pairs = self_candidate_pairs(&index, blocking);
    let prepared = scorer.prepare_all(dataset.entities());
    let mut scored: Vec<(usize, usize, f64)> = pairs
        .pairs
        .par_iter()
        .map(|&(a, b)| (a, b, model.predict(&scorer.score_prepared(&prepared[a], &prepared[b]))))
        .collect();
    scored.sort_by(|x, y| y.2.total_cmp(&x.2).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));
    let stride = sample.stride.max(1);
    scored
        .into_iter()
        .enumerate()
        .step_by(stride)
        .take(sample.limit.unwrap_or(usize::MAX))
        .map(|(rank, (first, second, score))| ScanEntry { rank, first, second, score })
        .collect()
}

/// Entities taking part in at least one pair scoring at or above θ, as a
/// fraction of the dataset: a rough duplicate-rate estimate.
pub fn duplicate_rate(dataset: &Dataset, scan: &[ScanEntry], theta: f64) -> f64 {
    if dataset.is_empty() {
        return 0.0;
    }
    let involved: HashSet<usize> = scan
        .iter()
        .filter(|e| e.score >= theta)
        .flat_map(|e| [e.first, e.second])
        .collect();
    involved.len() as f64 / dataset.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combiner::Standardizer;
    use crate::matchers::Edge;
    use crate::model::{Entity, MatchedPair, Negatives, Side};

    fn matching(pairs: &[(usize, usize)]) -> Matching {
        Matching::new(pairs.iter().map(|&(left, right)| MatchedPair { left, right, score: 0.9 }).collect(), false)
    }

    fn truth(pos: &[(usize, usize)], neg: &[(usize, usize)]) -> TruthSet {
        TruthSet::new(4, 4, pos.iter().copied().collect(), Negatives::Explicit(neg.iter().copied().collect())).unwrap()
    }

    #[test]
    fn worked_example() {
        // a1..a3 = 0..2, b1..b3 = 0..2
        let t = truth(&[(0, 0), (1, 1)], &[(2, 2)]);
        let m = matching(&[(0, 0), (1, 2), (2, 2)]);
        let c = count_outcomes(&m, &t, FpCounting::Literal).unwrap();
        assert_eq!((c.tp, c.fn_, c.fp), (1, 1, 2));
        assert_eq!((c.fp_truth_negative, c.fp_left_inferred, c.fp_right_inferred), (1, 1, 0));
        assert_eq!(c.precision(), 1.0 / 3.0);
        assert_eq!(c.recall(), 0.5);
    }

    #[test]
    fn perfect_and_empty() {
        let t = truth(&[(0, 0), (1, 1)], &[]);
        let c = count_outcomes(&matching(&[(0, 0), (1, 1)]), &t, FpCounting::Literal).unwrap();
        assert_eq!((c.tp, c.fn_, c.fp), (2, 0, 0));
        let c = count_outcomes(&matching(&[]), &t, FpCounting::Literal).unwrap();
        assert_eq!((c.tp, c.fn_, c.fp), (0, 2, 0));
        assert_eq!(c.recall(), 0.0);
        assert_eq!(c.precision(), 1.0);
        let empty = truth(&[], &[]);
        let c = count_outcomes(&matching(&[]), &empty, FpCounting::Literal).unwrap();
        assert_eq!((c.precision(), c.recall()), (1.0, 1.0));
    }

    #[test]
    fn literal_sum_can_count_a_pair_three_times() {
        let t = truth(&[(0, 1), (1, 0)], &[(0, 0)]);
        let m = matching(&[(0, 0)]);
        assert_eq!(count_outcomes(&m, &t, FpCounting::Literal).unwrap().fp, 3);
        assert_eq!(count_outcomes(&m, &t, FpCounting::Deduplicated).unwrap().fp, 1);
    }

    #[test]
    fn dangling_handles_rejected() {
        let t = truth(&[(0, 0)], &[]);
        assert!(matches!(count_outcomes(&matching(&[(9, 0)]), &t, FpCounting::Literal), Err(Error::DanglingReference(_))));
    }

    fn bonus() -> ScoredGraph {
        let e = |left, right, score| Edge { left, right, score };
        ScoredGraph::new(2, 2, vec![e(0, 0, 0.99), e(0, 1, 0.94), e(1, 0, 0.87), e(1, 1, 0.81)]).unwrap()
    }

    #[test]
    fn pr_curve_on_bonus_fixture() {
        let t = TruthSet::new(2, 2, [(0, 0)].into_iter().collect(), Negatives::Explicit(Default::default())).unwrap();
        let cfg = MatcherConfig::default();
        let mw = pr_curve(&bonus(), Algorithm::MaxWeight, &t, &[0.96, 0.55], &cfg, FpCounting::Literal).unwrap();
        assert_eq!(mw.len(), 2);
        assert_eq!(mw[0].theta, 0.55);
        assert_eq!(mw[0].recall, 0.0);
        assert_eq!(mw[1].recall, 1.0);
        assert!(mw[0].weight > mw[1].weight);
        assert!(mw[0].counts.tp < mw[1].counts.tp);

        let g = pr_curve(&bonus(), Algorithm::Greedy, &t, &[0.96, 0.55], &cfg, FpCounting::Literal).unwrap();
        assert!(g[0].recall >= g[1].recall);

        let one = pr_curve(&bonus(), Algorithm::Greedy, &t, &[0.5], &cfg, FpCounting::Literal).unwrap();
        assert_eq!((one[0].precision, one[0].recall), (1.0, 1.0));
    }

    #[test]
    fn pr_curve_rejects_bad_grids() {
        let t = truth(&[], &[]);
        let cfg = MatcherConfig::default();
        assert!(pr_curve(&bonus(), Algorithm::Greedy, &t, &[], &cfg, FpCounting::Literal).is_err());
        assert!(pr_curve(&bonus(), Algorithm::Greedy, &t, &[1.5], &cfg, FpCounting::Literal).is_err());
    }

    #[test]
    fn grids() {
        let g = default_grid();
        assert_eq!(g.len(), 101);
        assert_eq!((g[0], g[100]), (0.0, 1.0));
        assert_eq!(score_grid(&bonus()), vec![0.81, 0.87, 0.94, 0.99]);
    }

    fn title_model() -> LogisticModel {
        // Score driven by the title feature alone.
        LogisticModel::from_parts([0.0, 8.0, 0.0, 0.0, 0.0], -4.0, Standardizer::identity())
    }

    #[test]
    fn duplicate_scan_ranks_identical_pair_first() {
        let d = Dataset::new(
            "d",
            Side::Left,
            vec![Entity::new("a", "Heat"), Entity::new("b", "Heat Wave"), Entity::new("c", "Heat")],
        )
        .unwrap();
        let scan = self_duplicate_scan(&d, &FeatureScorer::default(), &title_model(), &Default::default(), &Default::default());
        assert_eq!((scan[0].first, scan[0].second), (0, 2));
        assert_eq!(scan.len(), 3);
        let mut seen = HashSet::new();
        for e in &scan {
            assert!(e.first < e.second);
            assert!(seen.insert((e.first, e.second)));
        }
        assert!((duplicate_rate(&d, &scan, 0.9) - 2.0 / 3.0).abs() < 1e-12);

        let sampled = self_duplicate_scan(
            &d,
            &FeatureScorer::default(),
            &title_model(),
            &Default::default(),
            &SampleSpec { stride: 2, limit: Some(1) },
        );
        assert_eq!(sampled.len(), 1);
        assert_eq!(sampled[0].rank, 0);
    }

    #[test]
    fn duplicate_scan_without_shared_tokens_is_empty() {
        let d = Dataset::new("d", Side::Left, vec![Entity::new("a", "Heat"), Entity::new("b", "Alien")]).unwrap();
        let scan = self_duplicate_scan(&d, &FeatureScorer::default(), &title_model(), &Default::default(), &Default::default());
        assert!(scan.is_empty());
    }
}
