//! Seeded generator of paired movie catalogs with known ground truth.
//!
//! Each side holds `n_left` / `n_right` primary movies, of which
//! `round(overlap * n_left)` are shared. Satellites and within-side
//! duplicates are extra rows on top of the primaries. A satellite is a
//! companion documentary of a shared movie, cataloged as "Making of …" on
//! the left and "… Bonus Material" on the right; the two rows are the same
//! entity.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, Entity, Side, TruthSet};

/// Per-field probability that a copy omits the attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissingRates {
    pub year: f64,
    pub runtime: f64,
    pub cast: f64,
    pub directors: f64,
}

impl Default for MissingRates {
    fn default() -> Self {
        MissingRates { year: 0.05, runtime: 0.1, cast: 0.05, directors: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_left: usize,
    pub n_right: usize,
    /// Fraction of left primaries that also appear on the right.
    pub overlap: f64,
    /// Chance a primary row gets a near-identical twin on its own side.
    pub duplicate_rate: f64,
    /// Chance a shared movie gains a satellite on each side.
    pub satellite_probability: f64,
    /// Chance a copy's title is perturbed.
    pub title_noise: f64,
    /// Copies shift the year by up to this many years either way.
    pub year_jitter: u32,
    /// Copies shift the runtime by up to this many minutes either way.
    pub runtime_jitter: u32,
    pub cast_pool_size: usize,
    pub director_pool_size: usize,
    pub vocabulary_size: usize,
    /// Exponent of the Zipf law over title tokens.
    pub zipf_exponent: f64,
    /// Chance a copy drops any one cast member.
    pub cast_drop: f64,
    /// Chance a copied name is reduced to "F. Last".
    pub initialism_probability: f64,
    /// Chance a new movie reuses an earlier movie's title.
    pub remake_rate: f64,
    pub missing: MissingRates,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_left: 1000,
            n_right: 1000,
            overlap: 0.8,
            duplicate_rate: 0.0,
            satellite_probability: 0.0,
            title_noise: 0.1,
            year_jitter: 1,
            runtime_jitter: 5,
            cast_pool_size: 5000,
            director_pool_size: 500,
            vocabulary_size: 3000,
            zipf_exponent: 1.0,
            cast_drop: 0.1,
            initialism_probability: 0.1,
            remake_rate: 0.02,
            missing: MissingRates::default(),
        }
    }
}

impl SynthConfig {
    /// A config with every noise source switched off.
    pub fn noiseless(n: usize, seed: u64) -> Self {
        SynthConfig {
            seed,
            n_left: n,
            n_right: n,
            overlap: 1.0,
            title_noise: 0.0,
            year_jitter: 0,
            runtime_jitter: 0,
            cast_drop: 0.0,
            initialism_probability: 0.0,
            remake_rate: 0.0,
            missing: MissingRates { year: 0.0, runtime: 0.0, cast: 0.0, directors: 0.0 },
            ..SynthConfig::default()
        }
    }

    pub fn shared_count(&self) -> usize {
        (self.overlap * self.n_left as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("overlap", self.overlap),
            ("duplicate_rate", self.duplicate_rate),
            ("satellite_probability", self.satellite_probability),
            ("title_noise", self.title_noise),
            ("cast_drop", self.cast_drop),
            ("initialism_probability", self.initialism_probability),
            ("remake_rate", self.remake_rate),
            ("missing.year", self.missing.year),
            ("missing.runtime", self.missing.runtime),
            ("missing.cast", self.missing.cast),
            ("missing.directors", self.missing.directors),
        ];
        for (name, v) in rates {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if self.cast_pool_size == 0 || self.director_pool_size == 0 || self.vocabulary_size == 0 {
            return Err(Error::Config("pool sizes must be positive".into()));
        }
        if !(self.zipf_exponent.is_finite() && self.zipf_exponent >= 0.0) {
            return Err(Error::Config(format!("zipf_exponent = {} must be finite and non-negative", self.zipf_exponent)));
        }
        let shared = self.shared_count();
        if shared > self.n_right {
            return Err(Error::Config(format!(
                "overlap needs {shared} shared movies but the right side only has {}",
                self.n_right
            )));
        }
        Ok(())
    }
}

/// What the generator actually produced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthStats {
    pub shared: usize,
    pub satellite_parents: usize,
    pub duplicates_left: usize,
    pub duplicates_right: usize,
    pub remakes: usize,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub left: Dataset,
    pub right: Dataset,
    /// Complete: every pair that is not a positive is a known non-match.
    pub truth: TruthSet,
    pub stats: SynthStats,
}

/// A movie before any per-side noise.
#[derive(Debug, Clone)]
struct Movie {
    title: Vec<String>,
    year: i32,
    runtime: u32,
    cast: Vec<String>,
    directors: Vec<String>,
    /// Rendered as "Making of …" on the left and "… Bonus Material" on the right.
    companion: bool,
}

/// A row plus the identity of the movie it depicts.
struct Row {
    key: usize,
    entity: Entity,
}

const SYLLABLES: [&str; 24] = [
    "ba", "ka", "da", "fa", "ga", "la", "ma", "na", "pa", "ra", "sa", "ta", "be", "ko", "di", "fu", "go", "li", "mo",
    "nu", "pe", "ro", "si", "tu",
];

/// Deterministic pseudo-word for index `i`; distinct indices give distinct
/// words, and every word has at least two syllables.
fn pseudo_word(i: usize) -> String {
    let base = SYLLABLES.len();
    let mut n = i + base;
    let mut parts = Vec::new();
    while n > 0 {
        parts.push(SYLLABLES[n % base]);
        n /= base;
    }
    parts.concat()
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn person(i: usize) -> String {
    // Small first-name pool, large last-name pool, like real credits.
    let first = pseudo_word(i % 97 + 1);
    let last = pseudo_word(i / 97 * 31 + i % 31 + 500);
    format!("{} {}", capitalize(&first), capitalize(&last))
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    zipf: Zipf<f64>,
    runtime: Normal<f64>,
    movies: Vec<Movie>,
    remakes: usize,
}

impl<'a> Generator<'a> {
    fn new(cfg: &'a SynthConfig) -> Self {
        Generator {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            zipf: Zipf::new(cfg.vocabulary_size as f64, cfg.zipf_exponent).expect("validated zipf parameters"),
            runtime: Normal::new(105.0, 20.0).expect("valid normal"),
            movies: Vec::new(),
            remakes: 0,
        }
    }

    fn token(&mut self) -> String {
        let rank = self.zipf.sample(&mut self.rng) as usize;
        pseudo_word(rank)
    }

    fn fresh_title(&mut self) -> Vec<String> {
        let len = self.rng.random_range(1..=4);
        let mut title: Vec<String> = Vec::with_capacity(len);
        while title.len() < len {
            let t = self.token();
            if !title.contains(&t) {
                title.push(t);
            }
        }
        title
    }

    fn new_movie(&mut self) -> usize {
        let title = if !self.movies.is_empty() && self.rng.random_bool(self.cfg.remake_rate) {
            self.remakes += 1;
            let src = self.rng.random_range(0..self.movies.len());
            self.movies[src].title.clone()
        } else {
            self.fresh_title()
        };
        let year = self.rng.random_range(1930..=2015);
        let runtime = self.runtime.sample(&mut self.rng).round().clamp(60.0, 220.0) as u32;
        let n_cast = self.rng.random_range(3..=8);
        let mut cast = Vec::with_capacity(n_cast);
        while cast.len() < n_cast.min(self.cfg.cast_pool_size) {
            let p = person(self.rng.random_range(0..self.cfg.cast_pool_size));
            if !cast.contains(&p) {
                cast.push(p);
            }
        }
        let mut directors = vec![self.director()];
        if self.rng.random_bool(0.1) {
            let d = self.director();
            if !directors.contains(&d) {
                directors.push(d);
            }
        }
        self.movies.push(Movie { title, year, runtime, cast, directors, companion: false });
        self.movies.len() - 1
    }

    fn director(&mut self) -> String {
        // Offset keeps directors apart from the cast pool.
        person(self.rng.random_range(0..self.cfg.director_pool_size) + 1_000_000)
    }

    /// Companion documentary of `parent`: same underlying entity on both
    /// sides, cataloged under a different title template on each. Keeps a
    /// partial parent cast; different director, short runtime.
    fn satellite(&mut self, parent: usize) -> usize {
        let p = self.movies[parent].clone();
        let mut cast: Vec<String> = p.cast.iter().filter(|_| self.rng.random_bool(0.6)).cloned().collect();
        if cast.is_empty() {
            cast.push(p.cast[0].clone());
        }
        let movie = Movie {
            title: p.title,
            year: p.year + self.rng.random_range(0..=1),
            runtime: self.rng.random_range(15..=60),
            cast,
            directors: vec![self.director()],
            companion: true,
        };
        self.movies.push(movie);
        self.movies.len() - 1
    }

    fn name(&mut self, name: &str) -> String {
        if self.rng.random_bool(self.cfg.initialism_probability) {
            let mut parts = name.split_whitespace();
            if let (Some(first), Some(last)) = (parts.next(), parts.next_back()) {
                let initial = first.chars().next().unwrap_or('X');
                return format!("{initial}. {last}");
            }
        }
        name.to_string()
    }

    fn noisy_title(&mut self, title: &[String]) -> String {
        let mut words: Vec<String> = title.iter().map(|w| capitalize(w)).collect();
        if self.rng.random_bool(self.cfg.title_noise) {
            match self.rng.random_range(0..4) {
                0 if words.len() > 1 => {
                    let i = self.rng.random_range(0..words.len());
                    words.remove(i);
                }
                1 => {
                    let t = capitalize(&self.token());
                    let i = self.rng.random_range(0..=words.len());
                    words.insert(i, t);
                }
                2 => {
                    let i = self.rng.random_range(0..words.len());
                    let w: Vec<char> = words[i].chars().collect();
                    if w.len() > 2 {
                        let j = self.rng.random_range(1..w.len() - 1);
                        let mut w = w;
                        w.swap(j, j + 1);
                        words[i] = w.into_iter().collect();
                    }
                }
                _ => words.insert(0, "The".to_string()),
            }
        }
        words.join(" ")
    }

    fn jitter(&mut self, range: u32) -> i64 {
        if range == 0 {
            0
        } else {
            self.rng.random_range(-(range as i64)..=range as i64)
        }
    }

    /// One side's rendering of a movie.
    fn render(&mut self, key: usize, side: Side) -> Entity {
        let m = self.movies[key].clone();
        let miss = self.cfg.missing;
        let title: Vec<String> = match (m.companion, side) {
            (false, _) => m.title,
            (true, Side::Left) => ["making", "of"].iter().map(|w| w.to_string()).chain(m.title).collect(),
            (true, Side::Right) => m.title.into_iter().chain(["bonus".to_string(), "material".to_string()]).collect(),
        };
        let mut e = Entity::new(String::new(), self.noisy_title(&title));
        if !self.rng.random_bool(miss.year) {
            let j = self.jitter(self.cfg.year_jitter);
            e = e.with_year(m.year + j as i32);
        }
        if !self.rng.random_bool(miss.runtime) {
            let j = self.jitter(self.cfg.runtime_jitter);
            e = e.with_runtime((m.runtime as i64 + j).max(1) as u32);
        }
        if !self.rng.random_bool(miss.cast) {
            let mut cast = Vec::new();
            for c in &m.cast {
                if !self.rng.random_bool(self.cfg.cast_drop) {
                    cast.push(self.name(c));
                }
            }
            e = e.with_cast(cast);
        }
        if !self.rng.random_bool(miss.directors) {
            let directors: Vec<String> = m.directors.iter().map(|d| self.name(d)).collect();
            e = e.with_directors(directors);
        }
        e
    }

    /// Appends a twin for each primary row with the configured probability.
    fn duplicate(&mut self, rows: &mut Vec<Row>, side: Side) -> usize {
        let primaries = rows.len();
        let mut added = 0;
        for i in 0..primaries {
            if self.rng.random_bool(self.cfg.duplicate_rate) {
                let key = rows[i].key;
                let entity = self.render(key, side);
                rows.push(Row { key, entity });
                added += 1;
            }
        }
        added
    }

    fn finish(&mut self, mut rows: Vec<Row>, side: Side) -> Result<(Dataset, Vec<usize>)> {
        rows.shuffle(&mut self.rng);
        let prefix = match side {
            Side::Left => 'l',
            Side::Right => 'r',
        };
        let width = rows.len().to_string().len().max(4);
        let mut keys = Vec::with_capacity(rows.len());
        let entities = rows
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                keys.push(row.key);
                Entity { id: format!("{prefix}{i:0width$}"), ..row.entity }
            })
            .collect();
        Ok((Dataset::new(format!("synth-{side}"), side, entities)?, keys))
    }
}

/// Generates a corpus; the same config always yields the same corpus.
pub fn generate(config: &SynthConfig) -> Result<SynthCorpus> {
    config.validate()?;
    let mut g = Generator::new(config);
    let shared = config.shared_count();

    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut satellite_parents = 0;
    for _ in 0..shared {
        let key = g.new_movie();
        let entity = g.render(key, Side::Left);
        left.push(Row { key, entity });
        let entity = g.render(key, Side::Right);
        right.push(Row { key, entity });
    }
    for _ in shared..config.n_left {
        let key = g.new_movie();
        let entity = g.render(key, Side::Left);
        left.push(Row { key, entity });
    }
    for _ in shared..config.n_right {
        let key = g.new_movie();
        let entity = g.render(key, Side::Right);
        right.push(Row { key, entity });
    }
    let duplicates_left = g.duplicate(&mut left, Side::Left);
    let duplicates_right = g.duplicate(&mut right, Side::Right);
    for parent in 0..shared {
        if g.rng.random_bool(config.satellite_probability) {
            satellite_parents += 1;
            let key = g.satellite(parent);
            let entity = g.render(key, Side::Left);
            left.push(Row { key, entity });
            let entity = g.render(key, Side::Right);
            right.push(Row { key, entity });
        }
    }

    let (left, left_keys) = g.finish(left, Side::Left)?;
    let (right, right_keys) = g.finish(right, Side::Right)?;

    let mut by_key: Vec<Vec<usize>> = vec![Vec::new(); g.movies.len()];
    for (h, &k) in right_keys.iter().enumerate() {
        by_key[k].push(h);
    }
    let mut positives = BTreeSet::new();
    for (l, &k) in left_keys.iter().enumerate() {
        for &r in &by_key[k] {
            positives.insert((l, r));
        }
    }
    let truth = TruthSet::complete(left.len(), right.len(), positives)?;
    let stats = SynthStats { shared, satellite_parents, duplicates_left, duplicates_right, remakes: g.remakes };
    Ok(SynthCorpus { left, right, truth, stats })
}
