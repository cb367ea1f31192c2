//! Resolution algorithms over a sparse bipartite graph of scored pairs.
//!
//! Every matcher only considers edges scoring at least the threshold θ.
//! Ties are broken by (score desc, left handle asc, right handle asc) so each
//! matcher is a pure function of `(graph, θ)`.

mod brute_force;
mod max_weight;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MatchedPair, Matching};

pub use brute_force::{brute_force_max_weight, BRUTE_FORCE_MAX_SIDE};
pub use max_weight::max_weight_with;

/// Two weights closer than this are treated as equal when choosing between
/// maximum-weight matchings.
pub const WEIGHT_TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub left: usize,
    pub right: usize,
    pub score: f64,
}

/// Orders edges by score descending, then left and right handle ascending.
pub fn priority_order(a: &Edge, b: &Edge) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.left.cmp(&b.left))
        .then(a.right.cmp(&b.right))
}

/// Scored candidate pairs as a weighted bipartite graph. Unblocked pairs
/// score zero and are simply not present.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoredGraph {
    left_len: usize,
    right_len: usize,
    edges: Vec<Edge>,
}

impl ScoredGraph {
    /// Validates and sorts the edges by `(left, right)`.
    pub fn new(left_len: usize, right_len: usize, mut edges: Vec<Edge>) -> Result<Self> {
        for e in &edges {
            if e.left >= left_len || e.right >= right_len {
                return Err(Error::InvalidGraph(format!("edge ({}, {}) out of range", e.left, e.right)));
            }
            if !(e.score.is_finite() && e.score > 0.0 && e.score <= 1.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has score {} outside (0, 1]",
                    e.left, e.right, e.score
                )));
            }
        }
        edges.sort_by_key(|e| (e.left, e.right));
        if let Some(w) = edges.windows(2).find(|w| (w[0].left, w[0].right) == (w[1].left, w[1].right)) {
            return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", w[0].left, w[0].right)));
        }
        Ok(ScoredGraph { left_len, right_len, edges })
    }

    pub fn left_len(&self) -> usize {
        self.left_len
    }

    pub fn right_len(&self) -> usize {
        self.right_len
    }

    /// Edges sorted by `(left, right)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn qualifying(&self, threshold: f64) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.score >= threshold)
    }

    /// Distinct scores in ascending order.
    pub fn distinct_scores(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.edges.iter().map(|e| e.score).collect();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s
    }
}

fn to_matching<'a>(edges: impl IntoIterator<Item = &'a Edge>, constrained: bool) -> Matching {
    Matching::new(
        edges.into_iter().map(|e| MatchedPair { left: e.left, right: e.right, score: e.score }).collect(),
        constrained,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Direction {
    #[default]
    LeftToRight,
    RightToLeft,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "l2r" | "left-to-right" => Ok(Direction::LeftToRight),
            "r2l" | "right-to-left" => Ok(Direction::RightToLeft),
            other => Err(format!("unknown direction {other:?} (expected l2r or r2l)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    ManyMany,
    FirstChoice(Direction),
    MutualFirstChoice,
    Greedy,
    MaxWeight,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::ManyMany,
        Algorithm::FirstChoice(Direction::LeftToRight),
        Algorithm::MutualFirstChoice,
        Algorithm::Greedy,
        Algorithm::MaxWeight,
    ];

    /// Whether the output is guaranteed one-to-one.
    pub fn is_one_to_one(self) -> bool {
        matches!(self, Algorithm::MutualFirstChoice | Algorithm::Greedy | Algorithm::MaxWeight)
    }

    /// Whether lowering θ can only add pairs.
    pub fn is_threshold_monotone(self) -> bool {
        !matches!(self, Algorithm::MaxWeight)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::ManyMany => "many-many",
            Algorithm::FirstChoice(_) => "first-choice",
            Algorithm::MutualFirstChoice => "mutual",
            Algorithm::Greedy => "greedy",
            Algorithm::MaxWeight => "max-weight",
        }
    }

    /// Parses a CLI algorithm name; `direction` only matters for first-choice.
    pub fn parse(name: &str, direction: Direction) -> std::result::Result<Self, String> {
        match name {
            "many-many" => Ok(Algorithm::ManyMany),
            "first-choice" => Ok(Algorithm::FirstChoice(direction)),
            "mutual" | "mutual-first-choice" => Ok(Algorithm::MutualFirstChoice),
            "greedy" => Ok(Algorithm::Greedy),
            "max-weight" => Ok(Algorithm::MaxWeight),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::FirstChoice(Direction::RightToLeft) => f.write_str("first-choice(r2l)"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatcherConfig {
    /// Largest connected component (in nodes) max-weight will solve.
    pub max_component_nodes: Option<usize>,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig { max_component_nodes: Some(200_000) }
    }
}

/// Every edge scoring at least θ.
pub fn many_many(graph: &ScoredGraph, threshold: f64) -> Matching {
    to_matching(graph.qualifying(threshold), false)
}

/// Each source entity's single best edge at or above θ; ties go to the
/// smaller counterpart handle.
pub fn first_choice(graph: &ScoredGraph, threshold: f64, direction: Direction) -> Matching {
    to_matching(first_choice_edges(graph, threshold, direction).iter(), false)
}

fn first_choice_edges(graph: &ScoredGraph, threshold: f64, direction: Direction) -> Vec<Edge> {
    let sources = match direction {
        Direction::LeftToRight => graph.left_len,
        Direction::RightToLeft => graph.right_len,
    };
    let mut best: Vec<Option<Edge>> = vec![None; sources];
    for e in graph.qualifying(threshold) {
        let (src, other) = match direction {
            Direction::LeftToRight => (e.left, e.right),
            Direction::RightToLeft => (e.right, e.left),
        };
        let better = match &best[src] {
            None => true,
            Some(b) => {
                let b_other = match direction {
                    Direction::LeftToRight => b.right,
                    Direction::RightToLeft => b.left,
                };
                e.score > b.score || (e.score == b.score && other < b_other)
            }
        };
        if better {
            best[src] = Some(*e);
        }
    }
    best.into_iter().flatten().collect()
}

/// Pairs that are each other's first choice.
pub fn mutual_first_choice(graph: &ScoredGraph, threshold: f64) -> Matching {
    let forward = first_choice(graph, threshold, Direction::LeftToRight);
    let backward = first_choice(graph, threshold, Direction::RightToLeft);
    let pairs = forward
        .pairs()
        .iter()
        .filter(|p| backward.contains(p.left, p.right))
        .copied()
        .collect();
    Matching::new(pairs, true)
}

/// Scans edges in priority order, keeping an edge when both endpoints are
/// still free.
pub fn greedy(graph: &ScoredGraph, threshold: f64) -> Matching {
    let mut edges: Vec<&Edge> = graph.qualifying(threshold).collect();
    edges.sort_by(|a, b| priority_order(a, b));
    let mut left_used = vec![false; graph.left_len];
    let mut right_used = vec![false; graph.right_len];
    let mut kept = Vec::new();
    for e in edges {
        if !left_used[e.left] && !right_used[e.right] {
            left_used[e.left] = true;
            right_used[e.right] = true;
            kept.push(e);
        }
    }
    to_matching(kept, true)
}

/// Exact maximum-weight matching over edges at or above θ, with the default
/// component cap.
pub fn max_weight(graph: &ScoredGraph, threshold: f64) -> Result<Matching> {
    max_weight_with(graph, threshold, &MatcherConfig::default())
}

pub fn run(algorithm: Algorithm, graph: &ScoredGraph, threshold: f64, config: &MatcherConfig) -> Result<Matching> {
    Ok(match algorithm {
        Algorithm::ManyMany => many_many(graph, threshold),
        Algorithm::FirstChoice(d) => first_choice(graph, threshold, d),
        Algorithm::MutualFirstChoice => mutual_first_choice(graph, threshold),
        Algorithm::Greedy => greedy(graph, threshold),
        Algorithm::MaxWeight => max_weight_with(graph, threshold, config)?,
    })
}

/// Compares two sorted pair lists lexicographically.
pub(crate) fn lex_cmp(a: &[(usize, usize)], b: &[(usize, usize)]) -> Ordering {
    a.cmp(b)
}

/// Whether a candidate matching of weight `w` and pairs `pairs` should
/// replace the incumbent.
pub(crate) fn beats(w: f64, pairs: &[(usize, usize)], best_w: f64, best_pairs: &[(usize, usize)]) -> bool {
    if w > best_w + WEIGHT_TIE_EPS {
        true
    } else if w < best_w - WEIGHT_TIE_EPS {
        false
    } else {
        lex_cmp(pairs, best_pairs) == Ordering::Less
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_matching;

    fn graph(l: usize, r: usize, edges: &[(usize, usize, f64)]) -> ScoredGraph {
        ScoredGraph::new(l, r, edges.iter().map(|&(left, right, score)| Edge { left, right, score }).collect()).unwrap()
    }

    fn pairs(m: &Matching) -> Vec<(usize, usize)> {
        m.handle_pairs().collect()
    }

    // Die Hard (0) and Die Hard 2 (1) on both sides.
    fn die_hard() -> ScoredGraph {
        graph(2, 2, &[(0, 0, 0.98), (0, 1, 0.90), (1, 0, 0.90), (1, 1, 0.97)])
    }

    // Left: Wizard (0), Marvelous Land (1). Right: Wizard (0), Marvelous Land (1).
    fn oz() -> ScoredGraph {
        graph(2, 2, &[(0, 0, 0.95), (1, 0, 0.90), (1, 1, 0.85)])
    }

    // Left: feature F1 (0), making-of B1 (1). Right: feature F2 (0), bonus B2 (1).
    fn bonus() -> ScoredGraph {
        graph(2, 2, &[(0, 0, 0.99), (0, 1, 0.94), (1, 0, 0.87), (1, 1, 0.81)])
    }

    #[test]
    fn graph_validation() {
        let e = |left, right, score| Edge { left, right, score };
        assert!(ScoredGraph::new(1, 1, vec![e(0, 0, 0.5), e(0, 0, 0.6)]).is_err());
        assert!(ScoredGraph::new(1, 1, vec![e(0, 0, 0.0)]).is_err());
        assert!(ScoredGraph::new(1, 1, vec![e(0, 0, f64::NAN)]).is_err());
        assert!(ScoredGraph::new(1, 1, vec![e(1, 0, 0.5)]).is_err());
    }

    #[test]
    fn many_many_examples() {
        assert_eq!(many_many(&die_hard(), 0.5).len(), 4);
        assert!(many_many(&ScoredGraph::default(), 0.5).is_empty());
        assert!(many_many(&die_hard(), 1.0).is_empty());
        assert_eq!(pairs(&many_many(&bonus(), 0.9)), vec![(0, 0), (0, 1)]);
    }

    #[test]
    fn first_choice_examples() {
        assert_eq!(pairs(&first_choice(&oz(), 0.5, Direction::LeftToRight)), vec![(0, 0), (1, 0)]);
        assert_eq!(pairs(&first_choice(&oz(), 0.5, Direction::RightToLeft)), vec![(0, 0), (1, 1)]);
        assert_eq!(pairs(&first_choice(&graph(1, 1, &[(0, 0, 0.7)]), 0.5, Direction::LeftToRight)), vec![(0, 0)]);
        let tie = graph(1, 3, &[(0, 2, 0.8), (0, 1, 0.8), (0, 0, 0.3)]);
        assert_eq!(pairs(&first_choice(&tie, 0.5, Direction::LeftToRight)), vec![(0, 1)]);
        assert!(first_choice(&oz(), 0.99, Direction::LeftToRight).is_empty());
    }

    #[test]
    fn mutual_first_choice_examples() {
        assert_eq!(pairs(&mutual_first_choice(&oz(), 0.5)), vec![(0, 0)]);
        assert_eq!(pairs(&mutual_first_choice(&graph(1, 1, &[(0, 0, 0.7)]), 0.5)), vec![(0, 0)]);
        // Right 0 is the favourite of every left node and prefers left 2.
        let star = graph(3, 3, &[(0, 0, 0.9), (1, 0, 0.8), (2, 0, 0.95), (0, 1, 0.5), (1, 2, 0.6)]);
        assert_eq!(pairs(&mutual_first_choice(&star, 0.1)), vec![(2, 0)]);
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(pairs(&greedy(&oz(), 0.5)), vec![(0, 0), (1, 1)]);
        assert_eq!(pairs(&greedy(&die_hard(), 0.5)), vec![(0, 0), (1, 1)]);
        assert!(greedy(&die_hard(), 0.99).is_empty());
    }

    #[test]
    fn max_weight_examples() {
        assert_eq!(pairs(&max_weight(&bonus(), 0.95).unwrap()), vec![(0, 0)]);
        let low = max_weight(&bonus(), 0.5).unwrap();
        assert_eq!(pairs(&low), vec![(0, 1), (1, 0)]);
        assert!((low.weight() - 1.81).abs() < 1e-12);
        assert_eq!(pairs(&max_weight(&graph(1, 1, &[(0, 0, 0.3)]), 0.1).unwrap()), vec![(0, 0)]);
        assert!(max_weight(&ScoredGraph::default(), 0.0).unwrap().is_empty());
    }

    #[test]
    fn max_weight_prefers_lexicographically_smallest_among_ties() {
        // Both perfect matchings weigh 1.0.
        let g = graph(2, 2, &[(0, 0, 0.5), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 0.5)]);
        assert_eq!(pairs(&max_weight(&g, 0.0).unwrap()), vec![(0, 0), (1, 1)]);
        assert_eq!(pairs(&brute_force_max_weight(&g, 0.0).unwrap()), vec![(0, 0), (1, 1)]);
        // A single heavier edge ties with two lighter ones.
        let g = graph(2, 2, &[(0, 1, 0.5), (1, 0, 0.5), (1, 1, 1.0)]);
        assert_eq!(pairs(&max_weight(&g, 0.0).unwrap()), vec![(0, 1), (1, 0)]);
        assert_eq!(pairs(&brute_force_max_weight(&g, 0.0).unwrap()), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn brute_force_examples() {
        let m = brute_force_max_weight(&bonus(), 0.5).unwrap();
        assert!((m.weight() - 1.81).abs() < 1e-12);
        assert!(brute_force_max_weight(&ScoredGraph::default(), 0.5).unwrap().is_empty());
        let fan = graph(1, 3, &[(0, 0, 0.2), (0, 1, 0.7), (0, 2, 0.4)]);
        assert_eq!(pairs(&brute_force_max_weight(&fan, 0.0).unwrap()), vec![(0, 1)]);
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let edges: Vec<(usize, usize, f64)> = (0..12).flat_map(|l| (0..12).map(move |r| (l, r, 0.5))).collect();
        let g = graph(12, 12, &edges);
        assert!(matches!(brute_force_max_weight(&g, 0.0), Err(Error::InstanceTooLarge(_))));
    }

    #[test]
    fn component_cap_is_enforced() {
        let cfg = MatcherConfig { max_component_nodes: Some(3) };
        assert!(matches!(max_weight_with(&die_hard(), 0.5, &cfg), Err(Error::InstanceTooLarge(_))));
        assert!(max_weight_with(&die_hard(), 0.99, &cfg).unwrap().is_empty());
    }

    #[test]
    fn constrained_outputs_validate() {
        for g in [die_hard(), oz(), bonus()] {
            for alg in [Algorithm::MutualFirstChoice, Algorithm::Greedy, Algorithm::MaxWeight] {
                let m = run(alg, &g, 0.5, &MatcherConfig::default()).unwrap();
                assert!(m.is_constrained());
                assert!(validate_matching(&m).is_empty());
            }
        }
    }

    #[test]
    fn algorithm_names_parse() {
        for alg in Algorithm::ALL {
            assert_eq!(Algorithm::parse(alg.name(), Direction::LeftToRight).unwrap(), alg);
        }
        assert_eq!(
            Algorithm::parse("first-choice", "r2l".parse().unwrap()).unwrap(),
            Algorithm::FirstChoice(Direction::RightToLeft)
        );
        assert!(Algorithm::parse("hungarian", Direction::LeftToRight).is_err());
    }
}
