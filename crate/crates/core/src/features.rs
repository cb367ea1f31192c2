//! Per-attribute comparison scores for a candidate pair.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::blocking::{normalize_words, Tokenizer};
use crate::model::Entity;

pub const FEATURE_COUNT: usize = 5;

/// Feature order used everywhere a vector is flattened.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = ["cast", "title", "year", "directors", "runtime"];

/// Feature-level scores of one pair. Year and runtime are absolute
/// differences and are absent when either side lacks the attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub cast: f64,
    pub title: f64,
    pub year: Option<f64>,
    pub directors: f64,
    pub runtime: Option<f64>,
}

impl FeatureVector {
    /// Components in [`FEATURE_NAMES`] order.
    pub fn to_array(&self) -> [Option<f64>; FEATURE_COUNT] {
        [Some(self.cast), Some(self.title), self.year, Some(self.directors), self.runtime]
    }

    /// Inverse of [`FeatureVector::to_array`]; absent cast, title or
    /// directors become 0.
    pub fn from_array(values: [Option<f64>; FEATURE_COUNT]) -> Self {
        FeatureVector {
            cast: values[0].unwrap_or(0.0),
            title: values[1].unwrap_or(0.0),
            year: values[2],
            directors: values[3].unwrap_or(0.0),
            runtime: values[4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureParams {
    /// Multiplier applied to partial title overlap.
    pub title_discount: f64,
    pub year_cap: f64,
    pub runtime_cap: f64,
    pub cast_cap: f64,
    /// Credit for two names agreeing only on their last word.
    pub partial_name_credit: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        FeatureParams {
            title_discount: 0.9,
            year_cap: 30.0,
            runtime_cap: 60.0,
            cast_cap: 5.0,
            partial_name_credit: 0.5,
        }
    }
}

/// A person name reduced to the keys used for matching.
#[derive(Debug, Clone, PartialEq, Eq)]
struct NameKey {
    full: String,
    last: String,
}

fn name_keys(names: &[String]) -> Vec<NameKey> {
    names
        .iter()
        .filter_map(|n| {
            let words = normalize_words(n);
            let last = words.last()?.clone();
            Some(NameKey { full: words.join(" "), last })
        })
        .collect()
}

/// An entity with its titles tokenized and names normalized once, so that
/// scoring many pairs does not repeat the string work.
#[derive(Debug, Clone)]
pub struct PreparedEntity {
    titles: Vec<Vec<String>>,
    year: Option<i32>,
    runtime: Option<u32>,
    cast: Vec<NameKey>,
    directors: Vec<NameKey>,
    director_count: usize,
}

impl PreparedEntity {
    pub fn new(entity: &Entity, tokenizer: &Tokenizer) -> Self {
        PreparedEntity {
            titles: entity
                .titles
                .iter()
                .map(|t| {
                    let mut tokens = tokenizer.tokens(t);
                    tokens.shrink_to_fit();
                    tokens
                })
                .collect(),
            year: entity.year,
            runtime: entity.runtime,
            cast: name_keys(&entity.cast),
            directors: name_keys(&entity.directors),
            director_count: entity.directors.len(),
        }
    }
}

/// Title similarity over pre-tokenized titles: the best over all title
/// pairs of 1 for identical token sequences, else the discounted fraction of
/// shared tokens relative to the longer title.
fn title_score_tokens(a: &[Vec<String>], b: &[Vec<String>], discount: f64) -> f64 {
    let mut best: f64 = 0.0;
    for ta in a {
        for tb in b {
            if ta == tb {
                return 1.0;
            }
            let longest = ta.len().max(tb.len());
            if longest == 0 {
                continue;
            }
            let common = common_count(ta, tb);
            best = best.max(discount * common as f64 / longest as f64);
        }
    }
    best
}

/// Size of the multiset intersection.
fn common_count(a: &[String], b: &[String]) -> usize {
    let mut counts: HashMap<&str, usize> = HashMap::with_capacity(a.len());
    for t in a {
        *counts.entry(t.as_str()).or_default() += 1;
    }
    let mut common = 0;
    for t in b {
        if let Some(c) = counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    common
}

/// One-to-one name alignment: identical full names first, then names
/// sharing only their last word at `partial_credit` each. Both passes pair
/// up as many names as possible, so the result is symmetric and a repeated
/// name can never be credited twice.
fn name_overlap(a: &[NameKey], b: &[NameKey], partial_credit: f64) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut full_a: HashMap<&str, usize> = HashMap::new();
    for n in a {
        *full_a.entry(n.full.as_str()).or_default() += 1;
    }
    let mut full_b: HashMap<&str, usize> = HashMap::new();
    for n in b {
        *full_b.entry(n.full.as_str()).or_default() += 1;
    }

    let mut full = 0usize;
    let mut rest_a: HashMap<&str, usize> = HashMap::new();
    let mut rest_b: HashMap<&str, usize> = HashMap::new();
    for (&name, &ca) in &full_a {
        let cb = full_b.get(name).copied().unwrap_or(0);
        let m = ca.min(cb);
        full += m;
        if ca > m {
            *rest_a.entry(last_of(name)).or_default() += ca - m;
        }
    }
    for (&name, &cb) in &full_b {
        let ca = full_a.get(name).copied().unwrap_or(0);
        let m = ca.min(cb);
        if cb > m {
            *rest_b.entry(last_of(name)).or_default() += cb - m;
        }
    }
    let partial: usize = rest_a
        .iter()
        .map(|(last, &ca)| ca.min(rest_b.get(last).copied().unwrap_or(0)))
        .sum();
    full as f64 + partial_credit * partial as f64
}

fn last_of(full: &str) -> &str {
    full.rsplit(' ').next().unwrap_or(full)
}

fn capped_difference(a: Option<i64>, b: Option<i64>, cap: f64) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) => Some(((a - b).abs() as f64).min(cap)),
        _ => None,
    }
}

/// Computes feature vectors under one tokenizer and parameter set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureScorer {
    pub tokenizer: Tokenizer,
    pub params: FeatureParams,
}

impl FeatureScorer {
    pub fn new(tokenizer: Tokenizer, params: FeatureParams) -> Self {
        FeatureScorer { tokenizer, params }
    }

    pub fn prepare(&self, entity: &Entity) -> PreparedEntity {
        PreparedEntity::new(entity, &self.tokenizer)
    }

    pub fn prepare_all(&self, entities: &[Entity]) -> Vec<PreparedEntity> {
        entities.iter().map(|e| self.prepare(e)).collect()
    }

    pub fn score_prepared(&self, a: &PreparedEntity, b: &PreparedEntity) -> FeatureVector {
        let p = &self.params;
        let directors = if a.director_count == 0 || b.director_count == 0 {
            0.0
        } else {
            let shorter = a.director_count.min(b.director_count) as f64;
            (name_overlap(&a.directors, &b.directors, p.partial_name_credit) / shorter).min(1.0)
        };
        FeatureVector {
            cast: name_overlap(&a.cast, &b.cast, p.partial_name_credit).min(p.cast_cap),
            title: title_score_tokens(&a.titles, &b.titles, p.title_discount),
            year: capped_difference(a.year.map(i64::from), b.year.map(i64::from), p.year_cap),
            directors,
            runtime: capped_difference(a.runtime.map(i64::from), b.runtime.map(i64::from), p.runtime_cap),
        }
    }

    pub fn feature_vector(&self, a: &Entity, b: &Entity) -> FeatureVector {
        self.score_prepared(&self.prepare(a), &self.prepare(b))
    }

    pub fn score_title<S: AsRef<str>>(&self, a: &[S], b: &[S]) -> f64 {
        let tok = |ts: &[S]| -> Vec<Vec<String>> { ts.iter().map(|t| self.tokenizer.tokens(t.as_ref())).collect() };
        title_score_tokens(&tok(a), &tok(b), self.params.title_discount)
    }

    pub fn score_year(&self, a: Option<i32>, b: Option<i32>) -> Option<f64> {
        capped_difference(a.map(i64::from), b.map(i64::from), self.params.year_cap)
    }

    pub fn score_runtime(&self, a: Option<u32>, b: Option<u32>) -> Option<f64> {
        capped_difference(a.map(i64::from), b.map(i64::from), self.params.runtime_cap)
    }

    pub fn score_cast<S: AsRef<str>>(&self, a: &[S], b: &[S]) -> f64 {
        let (a, b) = (to_owned(a), to_owned(b));
        name_overlap(&name_keys(&a), &name_keys(&b), self.params.partial_name_credit).min(self.params.cast_cap)
    }

    pub fn score_directors<S: AsRef<str>>(&self, a: &[S], b: &[S]) -> f64 {
        if a.is_empty() || b.is_empty() {
            return 0.0;
        }
        let (a, b) = (to_owned(a), to_owned(b));
        let shorter = a.len().min(b.len()) as f64;
        (name_overlap(&name_keys(&a), &name_keys(&b), self.params.partial_name_credit) / shorter).min(1.0)
    }
}

fn to_owned<S: AsRef<str>>(v: &[S]) -> Vec<String> {
    v.iter().map(|s| s.as_ref().to_string()).collect()
}

/// Title score under the default tokenizer and parameters.
pub fn score_title<S: AsRef<str>>(a: &[S], b: &[S]) -> f64 {
    FeatureScorer::default().score_title(a, b)
}

pub fn score_year(a: Option<i32>, b: Option<i32>) -> Option<f64> {
    FeatureScorer::default().score_year(a, b)
}

pub fn score_runtime(a: Option<u32>, b: Option<u32>) -> Option<f64> {
    FeatureScorer::default().score_runtime(a, b)
}

pub fn score_cast<S: AsRef<str>>(a: &[S], b: &[S]) -> f64 {
    FeatureScorer::default().score_cast(a, b)
}

pub fn score_directors<S: AsRef<str>>(a: &[S], b: &[S]) -> f64 {
    FeatureScorer::default().score_directors(a, b)
}

pub fn feature_vector(a: &Entity, b: &Entity) -> FeatureVector {
    FeatureScorer::default().feature_vector(a, b)
}
