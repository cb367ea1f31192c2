//! Title-token blocking.
//!
//! Only pairs whose titles share a normalized non-stopword token are ever
//! scored; every other pair is treated as scoring zero.

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::Result;
use crate::model::Dataset;

/// Token for titles with no alphanumeric characters at all (e.g. "+/-").
pub const EMPTY_NORMALIZED_TITLE: &str = "EMPTY_NORMALIZED_TITLE";
/// Token for titles made only of stopwords (e.g. "At").
pub const STOPWORDS_ONLY: &str = "STOPWORDS_ONLY";

pub const DEFAULT_STOPWORDS: &[&str] =
    &["a", "an", "and", "at", "for", "in", "of", "on", "the", "to", "&"];

/// Lowercases, folds diacritics, drops non-alphanumerics and splits on
/// whitespace. No stopword handling.
pub fn normalize_words(text: &str) -> Vec<String> {
    let folded: String = text
        .nfkd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect();
    folded.split_whitespace().map(str::to_string).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    stopwords: HashSet<String>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer::with_stopwords(DEFAULT_STOPWORDS.iter().copied())
    }
}

impl Tokenizer {
    pub fn with_stopwords<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        let stopwords = words
            .into_iter()
            .flat_map(|w| {
                let normalized = normalize_words(w.as_ref());
                // "&" normalizes to nothing; keep it verbatim so the list
                // round-trips.
                if normalized.is_empty() {
                    vec![w.as_ref().trim().to_lowercase()]
                } else {
                    normalized
                }
            })
            .filter(|w| !w.is_empty())
            .collect();
        Tokenizer { stopwords }
    }

    /// Reads a stopword list, one token per line. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut words = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                words.push(line.to_string());
            }
        }
        Ok(Tokenizer::with_stopwords(words))
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    pub fn stopwords(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.stopwords.iter().map(String::as_str).collect();
        v.sort_unstable();
        v
    }

    /// Normalized non-stopword tokens of a title, in order. Never empty: a
    /// title with nothing normalizable yields [`EMPTY_NORMALIZED_TITLE`] and
    /// one made only of stopwords yields [`STOPWORDS_ONLY`].
    pub fn tokens(&self, title: &str) -> Vec<String> {
        let words = normalize_words(title);
        if words.is_empty() {
            return vec![EMPTY_NORMALIZED_TITLE.to_string()];
        }
        let kept: Vec<String> = words.into_iter().filter(|w| !self.is_stopword(w)).collect();
        if kept.is_empty() {
            vec![STOPWORDS_ONLY.to_string()]
        } else {
            kept
        }
    }
}

/// Inverted index from title token to the sorted handles posted under it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenIndex {
    postings: BTreeMap<String, Vec<usize>>,
    len: usize,
}

impl TokenIndex {
    /// Posts every entity under every token of every one of its titles.
    pub fn build(dataset: &Dataset, tokenizer: &Tokenizer) -> Self {
        let mut postings: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (handle, entity) in dataset.entities().iter().enumerate() {
            for title in &entity.titles {
                for token in tokenizer.tokens(title) {
                    let list = postings.entry(token).or_default();
                    // Handles arrive in ascending order, so a duplicate can
                    // only be the last element.
                    if list.last() != Some(&handle) {
                        list.push(handle);
                    }
                }
            }
        }
        TokenIndex { postings, len: dataset.len() }
    }

    pub fn postings(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.postings
    }

    pub fn get(&self, token: &str) -> Option<&[usize]> {
        self.postings.get(token).map(Vec::as_slice)
    }

    /// Number of entities in the indexed dataset.
    pub fn entity_count(&self) -> usize {
        self.len
    }

    /// Tokens per entity handle, each list sorted.
    fn tokens_by_entity(&self) -> Vec<Vec<&str>> {
        let mut out = vec![Vec::new(); self.len];
        for (token, handles) in &self.postings {
            for &h in handles {
                out[h].push(token.as_str());
            }
        }
        out
    }
}

/// Knobs for candidate generation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockingOptions {
    /// Skip any token whose posting lists would yield more pairs than this.
    /// `None` disables the cap.
    pub max_pairs_per_token: Option<usize>,
}

/// Deduplicated candidate pairs, sorted by `(left, right)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidatePairSet {
    pub pairs: Vec<(usize, usize)>,
    /// Tokens dropped by [`BlockingOptions::max_pairs_per_token`].
    pub skipped_tokens: Vec<String>,
}

impl CandidatePairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, left: usize, right: usize) -> bool {
        self.pairs.binary_search(&(left, right)).is_ok()
    }
}

fn skipped_tokens(
    left: &TokenIndex,
    right: &TokenIndex,
    options: &BlockingOptions,
) -> HashSet<String> {
    let Some(cap) = options.max_pairs_per_token else {
        return HashSet::new();
    };
    left.postings
        .iter()
        .filter_map(|(token, lp)| {
            let rp = right.get(token)?;
            (lp.len().saturating_mul(rp.len()) > cap).then(|| {
                log::warn!(
                    "blocking: skipping token {token:?} ({} x {} pairs exceeds cap {cap})",
                    lp.len(),
                    rp.len()
                );
                token.clone()
            })
        })
        .collect()
}

/// All cross pairs that share at least one token.
pub fn candidate_pairs(left: &TokenIndex, right: &TokenIndex, options: &BlockingOptions) -> CandidatePairSet {
    let skipped = skipped_tokens(left, right, options);
    let by_left = left.tokens_by_entity();
    let pairs: Vec<(usize, usize)> = by_left
        .par_iter()
        .enumerate()
        .flat_map_iter(|(l, tokens)| {
            let mut partners: Vec<usize> = tokens
                .iter()
                .filter(|t| !skipped.contains(**t))
                .filter_map(|t| right.get(t))
                .flatten()
                .copied()
                .collect();
            partners.sort_unstable();
            partners.dedup();
            partners.into_iter().map(move |r| (l, r))
        })
        .collect();
    let mut skipped_tokens: Vec<String> = skipped.into_iter().collect();
    skipped_tokens.sort();
    CandidatePairSet { pairs, skipped_tokens }
}

/// Unordered within-dataset pairs `(a, b)`, `a < b`, sharing a token.
pub fn self_candidate_pairs(index: &TokenIndex, options: &BlockingOptions) -> CandidatePairSet {
    let mut pairs = candidate_pairs(index, index, options);
    pairs.pairs.retain(|&(a, b)| a < b);
    pairs
}
