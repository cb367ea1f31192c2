//! Exhaustive maximum-weight matching, used as a test oracle.

use super::{beats, Edge, ScoredGraph};
use crate::error::{Error, Result};
use crate::model::{MatchedPair, Matching};

/// Largest number of active nodes on the smaller side that will be
/// enumerated.
pub const BRUTE_FORCE_MAX_SIDE: usize = 10;

/// Enumerates every matching over edges at or above θ and returns the
/// heaviest, preferring the lexicographically smallest sorted pair list
/// among ties.
pub fn brute_force_max_weight(graph: &ScoredGraph, threshold: f64) -> Result<Matching> {
    let edges: Vec<Edge> = graph.qualifying(threshold).copied().collect();
    let mut lefts: Vec<usize> = edges.iter().map(|e| e.left).collect();
    let mut rights: Vec<usize> = edges.iter().map(|e| e.right).collect();
    lefts.sort_unstable();
    lefts.dedup();
    rights.sort_unstable();
    rights.dedup();
    if lefts.len().min(rights.len()) > BRUTE_FORCE_MAX_SIDE {
        return Err(Error::InstanceTooLarge(format!(
            "brute force needs at most {BRUTE_FORCE_MAX_SIDE} nodes on the smaller side, got {}",
            lefts.len().min(rights.len())
        )));
    }

    // Recurse over the smaller side; adjacency lists hold (partner, score).
    let swap = rights.len() < lefts.len();
    let (sources, targets) = if swap { (&rights, &lefts) } else { (&lefts, &rights) };
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); sources.len()];
    for e in &edges {
        let (s, t) = if swap { (e.right, e.left) } else { (e.left, e.right) };
        let si = sources.binary_search(&s).expect("source present");
        let ti = targets.binary_search(&t).expect("target present");
        adj[si].push((ti, e.score));
    }

    let mut search = Search {
        adj: &adj,
        sources,
        targets,
        swap,
        used: vec![false; targets.len()],
        chosen: Vec::new(),
        best_weight: 0.0,
        best_pairs: Vec::new(),
        best_scores: Vec::new(),
    };
    search.visit(0);

    let pairs = search
        .best_pairs
        .iter()
        .zip(&search.best_scores)
        .map(|(&(left, right), &score)| MatchedPair { left, right, score })
        .collect();
    Ok(Matching::new(pairs, true))
}

struct Search<'a> {
    adj: &'a [Vec<(usize, f64)>],
    sources: &'a [usize],
    targets: &'a [usize],
    swap: bool,
    used: Vec<bool>,
    /// (source index, target index, score)
    chosen: Vec<(usize, usize, f64)>,
    best_weight: f64,
    best_pairs: Vec<(usize, usize)>,
    best_scores: Vec<f64>,
}

impl Search<'_> {
    fn visit(&mut self, source: usize) {
        if source == self.adj.len() {
            self.consider();
            return;
        }
        self.visit(source + 1);
        for k in 0..self.adj[source].len() {
            let (t, score) = self.adj[source][k];
            if self.used[t] {
                continue;
            }
            self.used[t] = true;
            self.chosen.push((source, t, score));
            self.visit(source + 1);
            self.chosen.pop();
            self.used[t] = false;
        }
    }

    fn consider(&mut self) {
        let mut pairs: Vec<((usize, usize), f64)> = self
            .chosen
            .iter()
            .map(|&(s, t, score)| {
                let (s, t) = (self.sources[s], self.targets[t]);
                (if self.swap { (t, s) } else { (s, t) }, score)
            })
            .collect();
        pairs.sort_by_key(|(p, _)| *p);
        // Same summation order as `Matching::weight`.
        let weight: f64 = pairs.iter().map(|(_, s)| s).sum();
        let keys: Vec<(usize, usize)> = pairs.iter().map(|(p, _)| *p).collect();
        if self.best_pairs.is_empty() && self.best_weight == 0.0 && !keys.is_empty()
            || beats(weight, &keys, self.best_weight, &self.best_pairs)
        {
            self.best_weight = weight;
            self.best_pairs = keys;
            self.best_scores = pairs.iter().map(|(_, s)| *s).collect();
        }
    }
}
