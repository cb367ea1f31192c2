//! Exact maximum-weight bipartite matching on the thresholded graph.
//!
//! Each connected component is solved independently with successive
//! shortest augmenting paths (Dijkstra over reduced costs with node
//! potentials). Augmentation stops as soon as the best augmenting path has
//! no positive gain, which yields a maximum-weight (not maximum-cardinality)
//! matching.
//!
//! Among equally heavy matchings the lexicographically smallest sorted pair
//! list is returned. Optimal node potentials identify the few edges that can
//! appear in any optimum; only those are tried, left node by left node, and
//! each trial is confirmed by re-solving the rest of the component.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;

use super::{Edge, MatcherConfig, ScoredGraph, WEIGHT_TIE_EPS};
use crate::error::{Error, Result};
use crate::model::{MatchedPair, Matching};

/// Reduced-cost slack under which an edge counts as tight. An edge's slack
/// is the weight lost by forcing it into the matching, so only slack within
/// the tie tolerance (plus rounding headroom) can ever be confirmed.
const TIGHT_EPS: f64 = 10.0 * WEIGHT_TIE_EPS;

pub fn max_weight_with(graph: &ScoredGraph, threshold: f64, config: &MatcherConfig) -> Result<Matching> {
    let edges: Vec<Edge> = graph.qualifying(threshold).copied().collect();
    let components = components(graph.left_len(), graph.right_len(), &edges);
    if let Some(cap) = config.max_component_nodes {
        if let Some(c) = components.iter().find(|c| c.lefts.len() + c.rights.len() > cap) {
            return Err(Error::InstanceTooLarge(format!(
                "component with {} nodes exceeds the cap of {cap}",
                c.lefts.len() + c.rights.len()
            )));
        }
    }
    let pairs: Vec<MatchedPair> = components
        .par_iter()
        .map(Component::solve)
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(Matching::new(pairs, true))
}

/// A connected component with local indices. Local order follows global
/// handle order, so lexicographic comparisons carry over.
struct Component {
    lefts: Vec<usize>,
    rights: Vec<usize>,
    /// Per local left: (local right, score), ascending by right.
    adj: Vec<Vec<(usize, f64)>>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn components(left_len: usize, right_len: usize, edges: &[Edge]) -> Vec<Component> {
    let mut parent: Vec<usize> = (0..left_len + right_len).collect();
    for e in edges {
        let (a, b) = (find(&mut parent, e.left), find(&mut parent, left_len + e.right));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut slot_of_root = vec![usize::MAX; left_len + right_len];
    let mut out: Vec<Component> = Vec::new();
    let mut local_left = vec![usize::MAX; left_len];
    let mut local_right = vec![usize::MAX; right_len];
    let mut touched_left = vec![false; left_len];
    let mut touched_right = vec![false; right_len];
    for e in edges {
        touched_left[e.left] = true;
        touched_right[e.right] = true;
    }
    let mut slot = |root: usize, out: &mut Vec<Component>| {
        if slot_of_root[root] == usize::MAX {
            slot_of_root[root] = out.len();
            out.push(Component { lefts: Vec::new(), rights: Vec::new(), adj: Vec::new() });
        }
        slot_of_root[root]
    };
    for l in (0..left_len).filter(|&l| touched_left[l]) {
        let s = slot(find(&mut parent, l), &mut out);
        local_left[l] = out[s].lefts.len();
        out[s].lefts.push(l);
        out[s].adj.push(Vec::new());
    }
    for r in (0..right_len).filter(|&r| touched_right[r]) {
        let s = slot(find(&mut parent, left_len + r), &mut out);
        local_right[r] = out[s].rights.len();
        out[s].rights.push(r);
    }
    // Edges are sorted by (left, right), so adjacency lists come out sorted.
    for e in edges {
        let s = slot_of_root[find(&mut parent, e.left)];
        out[s].adj[local_left[e.left]].push((local_right[e.right], e.score));
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Result of one solve: partner per local left and the total weight.
struct Solution {
    mate: Vec<Option<usize>>,
    weight: f64,
}

impl Component {
    fn solve(&self) -> Vec<MatchedPair> {
        let nl = self.lefts.len();
        let nr = self.rights.len();
        let mut active_left = vec![true; nl];
        let mut active_right = vec![true; nr];
        let best = self.augment(&active_left, &active_right);
        let optimum = best.weight;
        let mut mate = best.mate;

        // Decide left nodes in ascending order, trying only edges that are
        // tight under optimal potentials and lexicographically earlier than
        // the current partner. Decided nodes leave the active set.
        if let Some(mut pi) = self.potentials(&mate) {
            for l in 0..nl {
                let current = mate[l];
                for &(r, w) in &self.adj[l] {
                    if Some(r) == current {
                        break;
                    }
                    let slack = -w + pi[l] - pi[nl + r];
                    if !active_right[r] || slack > TIGHT_EPS {
                        continue;
                    }
                    let Some((path, dist)) = self.return_path(&mate, &pi, &active_left, &active_right, l, r) else {
                        continue;
                    };
                    if slack + dist > TIGHT_EPS {
                        continue;
                    }
                    let candidate = self.exchange(&mate, l, r, &path);
                    if self.weight(&candidate) >= optimum - WEIGHT_TIE_EPS {
                        mate = candidate;
                        match self.potentials(&mate) {
                            Some(p) => pi = p,
                            None => return self.pairs(&mate),
                        }
                        break;
                    }
                }
                active_left[l] = false;
                if let Some(r) = mate[l] {
                    active_right[r] = false;
                }
            }
        }
        self.pairs(&mate)
    }

    fn pairs(&self, mate: &[Option<usize>]) -> Vec<MatchedPair> {
        mate.iter()
            .enumerate()
            .filter_map(|(l, m)| {
                m.map(|r| MatchedPair { left: self.lefts[l], right: self.rights[r], score: self.score(l, r) })
            })
            .collect()
    }

    fn weight(&self, mate: &[Option<usize>]) -> f64 {
        mate.iter().enumerate().filter_map(|(l, m)| m.map(|r| self.score(l, r))).sum()
    }

    /// Cheapest residual path from right node `r` back to left node `l`
    /// over active nodes, in reduced costs under `pi`. Together with the
    /// arc `l → r` it closes the alternating cycle that forces `(l, r)`
    /// into the matching; its true cost is `slack(l, r) + distance`.
    /// Node numbering follows [`Component::potentials`].
    fn return_path(
        &self,
        mate: &[Option<usize>],
        pi: &[f64],
        active_left: &[bool],
        active_right: &[bool],
        target: usize,
        start: usize,
    ) -> Option<(Vec<usize>, f64)> {
        let nl = self.lefts.len();
        let nr = self.rights.len();
        let hub = nl + nr;
        let mut mate_right = vec![None; nr];
        for (l, m) in mate.iter().enumerate() {
            if let Some(r) = *m {
                mate_right[r] = Some(l);
            }
        }
        let mut dist = vec![f64::INFINITY; hub + 1];
        let mut pred = vec![usize::MAX; hub + 1];
        let mut done = vec![false; hub + 1];
        let mut heap = BinaryHeap::new();
        let src = nl + start;
        dist[src] = 0.0;
        heap.push(Reverse((Dist(0.0), src)));
        while let Some(Reverse((Dist(d), u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if u == target {
                break;
            }
            let mut relax = |v: usize, cost: f64| {
                let nd = d + (cost + pi[u] - pi[v]).max(0.0);
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = u;
                    heap.push(Reverse((Dist(nd), v)));
                }
            };
            if u == hub {
                for l in (0..nl).filter(|&l| active_left[l] && mate[l].is_none()) {
                    relax(l, 0.0);
                }
                for r in (0..nr).filter(|&r| active_right[r] && mate_right[r].is_some()) {
                    relax(nl + r, 0.0);
                }
            } else if u < nl {
                // The target is never left again, so `u` is an interior node.
                for &(r, w) in &self.adj[u] {
                    if active_right[r] && mate[u] != Some(r) && r != start {
                        relax(nl + r, -w);
                    }
                }
                if mate[u].is_some() {
                    relax(hub, 0.0);
                }
            } else {
                let r = u - nl;
                match mate_right[r] {
                    Some(l) if active_left[l] => relax(l, self.score(l, r)),
                    Some(_) => {}
                    None => relax(hub, 0.0),
                }
            }
        }
        if !done[target] {
            return None;
        }
        let mut path = vec![target];
        let mut v = target;
        while v != src {
            v = pred[v];
            path.push(v);
        }
        path.reverse();
        Some((path, dist[target]))
    }

    /// Applies the alternating cycle `l → r ⇝ l` to `mate`.
    fn exchange(&self, mate: &[Option<usize>], l: usize, r: usize, path: &[usize]) -> Vec<Option<usize>> {
        let nl = self.lefts.len();
        let hub = nl + self.rights.len();
        let mut next = mate.to_vec();
        let mut added = vec![(l, r)];
        for arc in path.windows(2) {
            let (u, v) = (arc[0], arc[1]);
            if u == hub || v == hub {
                continue;
            }
            if u < nl {
                added.push((u, v - nl));
            } else {
                // Matched edge traversed backwards: it leaves the matching.
                next[v] = None;
            }
        }
        for (l, r) in added {
            next[l] = Some(r);
        }
        next
    }

    fn score(&self, l: usize, r: usize) -> f64 {
        let list = &self.adj[l];
        let k = list.binary_search_by_key(&r, |&(rr, _)| rr).expect("edge present");
        list[k].1
    }

    /// Successive shortest augmenting paths over the active sub-graph.
    ///
    /// The residual graph has a source feeding free left nodes and a sink
    /// fed by free right nodes; forward edges cost `-w`, matched edges run
    /// backwards at `+w`. Dijkstra stops as soon as the sink is settled and
    /// potentials advance by `min(d, d_sink)`, which keeps every reduced
    /// cost non-negative.
    fn augment(&self, active_left: &[bool], active_right: &[bool]) -> Solution {
        let nl = self.lefts.len();
        let nr = self.rights.len();
        let (source, sink) = (nl + nr, nl + nr + 1);
        let n = nl + nr + 2;
        let mut mate_left: Vec<Option<usize>> = vec![None; nl];
        let mut mate_right: Vec<Option<usize>> = vec![None; nr];
        let mut pot = vec![0.0f64; n];
        for (l, list) in self.adj.iter().enumerate() {
            if !active_left[l] {
                continue;
            }
            for &(r, w) in list {
                if active_right[r] {
                    pot[nl + r] = pot[nl + r].min(-w);
                }
            }
        }
        pot[sink] = (0..nr).filter(|&r| active_right[r]).map(|r| pot[nl + r]).fold(0.0, f64::min);

        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        loop {
            dist.fill(f64::INFINITY);
            pred.fill(usize::MAX);
            done.fill(false);
            heap.clear();
            dist[source] = 0.0;
            heap.push(Reverse((Dist(0.0), source)));
            let mut relax = |v: usize, nd: f64, from: usize, heap: &mut BinaryHeap<Reverse<(Dist, usize)>>| {
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = from;
                    heap.push(Reverse((Dist(nd), v)));
                }
            };
            while let Some(Reverse((Dist(d), u))) = heap.pop() {
                if done[u] {
                    continue;
                }
                done[u] = true;
                if u == sink {
                    break;
                }
                if u == source {
                    for l in 0..nl {
                        if active_left[l] && mate_left[l].is_none() {
                            relax(l, d + (pot[source] - pot[l]).max(0.0), u, &mut heap);
                        }
                    }
                } else if u < nl {
                    let l = u;
                    for &(r, w) in &self.adj[l] {
                        if active_right[r] && mate_left[l] != Some(r) {
                            relax(nl + r, d + (-w + pot[l] - pot[nl + r]).max(0.0), u, &mut heap);
                        }
                    }
                } else {
                    let r = u - nl;
                    match mate_right[r] {
                        Some(l) => {
                            let w = self.score(l, r);
                            relax(l, d + (w + pot[u] - pot[l]).max(0.0), u, &mut heap);
                        }
                        None => relax(sink, d + (pot[u] - pot[sink]).max(0.0), u, &mut heap),
                    }
                }
            }

            let d_sink = dist[sink];
            // True path cost is d_sink + pot[sink] - pot[source], and the
            // source potential never moves.
            if !d_sink.is_finite() || d_sink + pot[sink] - pot[source] >= 0.0 {
                break;
            }

            let mut r = pred[sink] - nl;
            loop {
                let l = pred[nl + r];
                let previous = mate_left[l];
                mate_left[l] = Some(r);
                mate_right[r] = Some(l);
                if pred[l] == source {
                    break;
                }
                r = previous.expect("interior path node is matched");
            }

            for (p, d) in pot.iter_mut().zip(&dist) {
                *p += d.min(d_sink);
            }
        }

        let mut weight = 0.0;
        for (l, m) in mate_left.iter().enumerate() {
            if let Some(r) = *m {
                weight += self.score(l, r);
            }
        }
        Solution { mate: mate_left, weight }
    }

    /// Node potentials π of the matching-as-flow residual graph, under which
    /// every residual arc has non-negative reduced cost. Nodes are numbered
    /// lefts, then rights, then a hub that joins path endpoints: matched
    /// lefts may drop out to it, free lefts enter from it, matched rights
    /// enter from it and free rights drain into it. `None` if the
    /// computation does not settle (a rounding-level negative cycle).
    fn potentials(&self, mate: &[Option<usize>]) -> Option<Vec<f64>> {
        let nl = self.lefts.len();
        let nr = self.rights.len();
        let hub = nl + nr;
        let mut mate_right = vec![None; nr];
        for (l, m) in mate.iter().enumerate() {
            if let Some(r) = *m {
                mate_right[r] = Some(l);
            }
        }
        let mut arcs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); hub + 1];
        for (l, list) in self.adj.iter().enumerate() {
            for &(r, w) in list {
                if mate[l] == Some(r) {
                    arcs[nl + r].push((l, w));
                } else {
                    arcs[l].push((nl + r, -w));
                }
            }
            if mate[l].is_some() {
                arcs[l].push((hub, 0.0));
            } else {
                arcs[hub].push((l, 0.0));
            }
        }
        for (r, m) in mate_right.iter().enumerate() {
            if m.is_some() {
                arcs[hub].push((nl + r, 0.0));
            } else {
                arcs[nl + r].push((hub, 0.0));
            }
        }

        // Shortest distances from a virtual root (SPFA). Improvements below
        // the tie tolerance are ignored so near-zero cycles cannot spin; a
        // node queued more than |V| times means a real negative cycle.
        let n = hub + 1;
        let mut pi = vec![0.0f64; n];
        let mut queued = vec![true; n];
        let mut visits = vec![0usize; n];
        let mut queue: VecDeque<usize> = (0..n).collect();
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            for &(v, c) in &arcs[u] {
                if pi[u] + c < pi[v] - WEIGHT_TIE_EPS {
                    pi[v] = pi[u] + c;
                    if !queued[v] {
                        visits[v] += 1;
                        if visits[v] > n {
                            log::warn!("max-weight: potentials did not settle; skipping tie refinement");
                            return None;
                        }
                        queued[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        Some(pi)
    }
}
