use std::collections::{BTreeMap, BTreeSet};

use onematch_core::matchers::{self, brute_force_max_weight};
use onematch_core::{Algorithm, Direction, Edge, MatcherConfig, Matching, ScoredGraph};
use proptest::prelude::*;

/// Small graphs with scores on a coarse grid so ties are common.
fn graph() -> impl Strategy<Value = ScoredGraph> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(nl, nr)| {
        prop::collection::btree_map((0..nl, 0..nr), 1u32..=20, 0..=nl * nr).prop_map(move |m: BTreeMap<_, _>| {
            let edges = m.into_iter().map(|((l, r), s)| Edge { left: l, right: r, score: s as f64 / 20.0 }).collect();
            ScoredGraph::new(nl, nr, edges).unwrap()
        })
    })
}

fn theta() -> impl Strategy<Value = f64> {
    (0u32..=20).prop_map(|k| k as f64 / 20.0)
}

fn pairs(m: &Matching) -> BTreeSet<(usize, usize)> {
    m.handle_pairs().collect()
}

fn one_to_one(m: &Matching) -> bool {
    let lefts: BTreeSet<usize> = m.pairs().iter().map(|p| p.left).collect();
    let rights: BTreeSet<usize> = m.pairs().iter().map(|p| p.right).collect();
    lefts.len() == m.len() && rights.len() == m.len()
}

fn run(alg: Algorithm, g: &ScoredGraph, t: f64) -> Matching {
    matchers::run(alg, g, t, &MatcherConfig::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn every_matcher_stays_inside_many_many(g in graph(), t in theta()) {
        let all = pairs(&matchers::many_many(&g, t));
        for alg in Algorithm::ALL.into_iter().chain([Algorithm::FirstChoice(Direction::RightToLeft)]) {
            let m = run(alg, &g, t);
            prop_assert!(pairs(&m).is_subset(&all), "{alg} left many-many");
            prop_assert!(m.pairs().iter().all(|p| p.score >= t));
        }
    }

    #[test]
    fn mutual_is_inside_both_first_choice_directions(g in graph(), t in theta()) {
        let mutual = pairs(&matchers::mutual_first_choice(&g, t));
        let l2r = pairs(&matchers::first_choice(&g, t, Direction::LeftToRight));
        let r2l = pairs(&matchers::first_choice(&g, t, Direction::RightToLeft));
        prop_assert!(mutual.is_subset(&l2r));
        prop_assert!(mutual.is_subset(&r2l));
        prop_assert_eq!(mutual, l2r.intersection(&r2l).copied().collect::<BTreeSet<_>>());
    }

    #[test]
    fn first_choice_picks_at_most_one_per_source(g in graph(), t in theta()) {
        let m = matchers::first_choice(&g, t, Direction::LeftToRight);
        let lefts: BTreeSet<usize> = m.pairs().iter().map(|p| p.left).collect();
        prop_assert_eq!(lefts.len(), m.len());
    }

    #[test]
    fn one_to_one_matchers_are_valid(g in graph(), t in theta()) {
        for alg in Algorithm::ALL.into_iter().filter(|a| a.is_one_to_one()) {
            let m = run(alg, &g, t);
            prop_assert!(one_to_one(&m), "{alg} produced a conflict");
            prop_assert!(m.is_constrained());
        }
    }

    #[test]
    fn monotone_matchers_nest_as_threshold_drops(g in graph(), lo in theta(), hi in theta()) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        for alg in Algorithm::ALL.into_iter().filter(|a| a.is_threshold_monotone()) {
            prop_assert!(run(alg, &g, hi).is_subset_of(&run(alg, &g, lo)), "{alg} not nested");
        }
    }

    #[test]
    fn max_weight_matches_oracle_and_bounds_greedy(g in graph(), t in theta()) {
        let mw = matchers::max_weight(&g, t).unwrap();
        let oracle = brute_force_max_weight(&g, t).unwrap();
        prop_assert!((mw.weight() - oracle.weight()).abs() <= 1e-12);
        // Among optimal matchings both pick the lexicographically smallest.
        prop_assert_eq!(pairs(&mw), pairs(&oracle));
        let gr = matchers::greedy(&g, t);
        prop_assert!(gr.weight() <= mw.weight() + 1e-12);
        prop_assert!(2.0 * gr.weight() >= mw.weight() - 1e-12);
    }

    #[test]
    fn matchers_are_pure(g in graph(), t in theta()) {
        for alg in Algorithm::ALL {
            prop_assert_eq!(run(alg, &g, t), run(alg, &g, t));
        }
    }
}
