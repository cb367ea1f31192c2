//! Logistic-regression score combiner.
//!
//! Feature vectors are centered and scaled (absent values imputed to the
//! training mean, i.e. 0 after standardization) and combined as
//! `σ(w·x̃ + w⁰)`, so a larger linear term always means a more likely match.
//! Parameters maximize the mean conditional log-likelihood, optionally with an
//! L2 penalty `λ/2·‖w‖²` on the weights (never the intercept).

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES};

/// Number of fitted parameters: one weight per feature plus the intercept.
pub const PARAM_COUNT: usize = FEATURE_COUNT + 1;

/// Standard deviations are never smaller than this.
pub const SD_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub features: FeatureVector,
    pub label: bool,
}

impl LabeledExample {
    pub fn new(features: FeatureVector, label: bool) -> Self {
        LabeledExample { features, label }
    }
}

/// Per-feature centering and scaling. Uses the population standard
/// deviation over present values; absent values impute to the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub means: [f64; FEATURE_COUNT],
    pub sds: [f64; FEATURE_COUNT],
}

impl Standardizer {
    /// Identity transform, useful for hand-built models.
    pub fn identity() -> Self {
        Standardizer { means: [0.0; FEATURE_COUNT], sds: [1.0; FEATURE_COUNT] }
    }

    pub fn fit(examples: &[LabeledExample]) -> Result<Self> {
        if examples.len() < 2 {
            return Err(Error::TrainingFailure(format!(
                "at least two examples are required, got {}",
                examples.len()
            )));
        }
        let mut means = [0.0; FEATURE_COUNT];
        let mut sds = [0.0; FEATURE_COUNT];
        for (j, name) in FEATURE_NAMES.iter().enumerate() {
            let values: Vec<f64> = examples.iter().filter_map(|e| e.features.to_array()[j]).collect();
            if values.is_empty() {
                return Err(Error::DegenerateFeature(name));
            }
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            means[j] = mean;
            sds[j] = var.sqrt().max(SD_FLOOR);
        }
        Ok(Standardizer { means, sds })
    }

    pub fn transform(&self, fv: &FeatureVector) -> [f64; FEATURE_COUNT] {
        let raw = fv.to_array();
        std::array::from_fn(|j| match raw[j] {
            Some(v) => (v - self.means[j]) / self.sds[j],
            None => 0.0,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    /// Full-batch gradient ascent with backtracking line search.
    #[default]
    GradientAscent,
    /// Newton steps (IRLS) with the same line search.
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub max_iters: usize,
    /// Convergence threshold on the ∞-norm of the objective gradient.
    pub tolerance: f64,
    /// L2 penalty on the weights.
    pub l2: f64,
    /// Seed for any sampling done while assembling training data.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { optimizer: Optimizer::GradientAscent, max_iters: 10_000, tolerance: 1e-8, l2: 1e-6, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub iterations: usize,
    pub log_likelihood: f64,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Objective after every accepted step, starting at the initial point.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: [f64; FEATURE_COUNT],
    pub intercept: f64,
    pub standardizer: Standardizer,
    pub config: TrainConfig,
    pub summary: TrainingSummary,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

impl LogisticModel {
    pub fn from_parts(weights: [f64; FEATURE_COUNT], intercept: f64, standardizer: Standardizer) -> Self {
        LogisticModel {
            weights,
            intercept,
            standardizer,
            config: TrainConfig::default(),
            summary: TrainingSummary::default(),
        }
    }

    /// `w·x̃ + w⁰`, the log-odds of a match.
    pub fn linear_term(&self, fv: &FeatureVector) -> f64 {
        let x = self.standardizer.transform(fv);
        self.linear_term_standardized(&x)
    }

    pub fn linear_term_standardized(&self, x: &[f64; FEATURE_COUNT]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.intercept
    }

    /// Match probability, strictly inside (0, 1).
    pub fn predict(&self, fv: &FeatureVector) -> f64 {
        clamp_open(sigmoid(self.linear_term(fv)))
    }

    pub fn predict_standardized(&self, x: &[f64; FEATURE_COUNT]) -> f64 {
        clamp_open(sigmoid(self.linear_term_standardized(x)))
    }

    /// Parameters as `[weights..., intercept]`.
    pub fn params(&self) -> [f64; PARAM_COUNT] {
        let mut p = [0.0; PARAM_COUNT];
        p[..FEATURE_COUNT].copy_from_slice(&self.weights);
        p[FEATURE_COUNT] = self.intercept;
        p
    }

    fn with_params(&self, p: &[f64; PARAM_COUNT]) -> Self {
        let mut m = self.clone();
        m.weights.copy_from_slice(&p[..FEATURE_COUNT]);
        m.intercept = p[FEATURE_COUNT];
        m
    }
}

fn clamp_open(p: f64) -> f64 {
    const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;
    p.clamp(f64::MIN_POSITIVE, BELOW_ONE)
}

/// Standardized design matrix with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub rows: Vec<[f64; FEATURE_COUNT]>,
    pub labels: Vec<bool>,
}

impl Design {
    pub fn new(examples: &[LabeledExample], standardizer: &Standardizer) -> Self {
        Design {
            rows: examples.iter().map(|e| standardizer.transform(&e.features)).collect(),
            labels: examples.iter().map(|e| e.label).collect(),
        }
    }

    /// Mean penalized log-likelihood and its exact gradient at `params`.
    pub fn objective(&self, params: &[f64; PARAM_COUNT], l2: f64) -> (f64, [f64; PARAM_COUNT]) {
        let n = self.rows.len().max(1) as f64;
        let mut ll = 0.0;
        let mut grad = [0.0; PARAM_COUNT];
        for (x, &y) in self.rows.iter().zip(&self.labels) {
            let z = x.iter().zip(params).map(|(a, b)| a * b).sum::<f64>() + params[FEATURE_COUNT];
            let p = sigmoid(z);
            let (l, r) = if y { (-softplus(-z), 1.0 - p) } else { (-softplus(z), -p) };
            ll += l;
            for j in 0..FEATURE_COUNT {
                grad[j] += r * x[j];
            }
            grad[FEATURE_COUNT] += r;
        }
        ll /= n;
        grad.iter_mut().for_each(|g| *g /= n);
        let mut penalty = 0.0;
        for j in 0..FEATURE_COUNT {
            penalty += params[j] * params[j];
            grad[j] -= l2 * params[j];
        }
        (ll - 0.5 * l2 * penalty, grad)
    }

    /// Negative-definite Hessian of [`Design::objective`].
    fn hessian(&self, params: &[f64; PARAM_COUNT], l2: f64) -> [[f64; PARAM_COUNT]; PARAM_COUNT] {
        let n = self.rows.len().max(1) as f64;
        let mut h = [[0.0; PARAM_COUNT]; PARAM_COUNT];
        for x in &self.rows {
            let z = x.iter().zip(params).map(|(a, b)| a * b).sum::<f64>() + params[FEATURE_COUNT];
            let p = sigmoid(z);
            let w = p * (1.0 - p);
            let xe: [f64; PARAM_COUNT] = std::array::from_fn(|j| if j < FEATURE_COUNT { x[j] } else { 1.0 });
            for a in 0..PARAM_COUNT {
                for b in 0..=a {
                    h[a][b] -= w * xe[a] * xe[b];
                }
            }
        }
        for a in 0..PARAM_COUNT {
            for b in 0..=a {
                h[a][b] /= n;
                h[b][a] = h[a][b];
            }
        }
        for (j, row) in h.iter_mut().enumerate().take(FEATURE_COUNT) {
            row[j] -= l2;
        }
        h
    }
}

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: [[f64; PARAM_COUNT]; PARAM_COUNT], mut b: [f64; PARAM_COUNT]) -> Option<[f64; PARAM_COUNT]> {
    for col in 0..PARAM_COUNT {
        let pivot = (col..PARAM_COUNT).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..PARAM_COUNT {
            let f = a[row][col] / a[col][col];
            for k in col..PARAM_COUNT {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; PARAM_COUNT];
    for row in (0..PARAM_COUNT).rev() {
        let s: f64 = (row + 1..PARAM_COUNT).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;
const MAX_STEP: f64 = 1e6;

/// Fits a standardizer and then the logistic parameters.
pub fn train_logistic(examples: &[LabeledExample], config: &TrainConfig) -> Result<LogisticModel> {
    let positives = examples.iter().filter(|e| e.label).count();
    if positives == 0 || positives == examples.len() {
        return Err(Error::DegenerateLabels);
    }
    let standardizer = Standardizer::fit(examples)?;
    let design = Design::new(examples, &standardizer);
    let (params, summary) = maximize(&design, config)?;
    let mut model = LogisticModel::from_parts([0.0; FEATURE_COUNT], 0.0, standardizer).with_params(&params);
    model.config = *config;
    model.summary = summary;
    Ok(model)
}

fn maximize(design: &Design, config: &TrainConfig) -> Result<([f64; PARAM_COUNT], TrainingSummary)> {
    let mut params = [0.0; PARAM_COUNT];
    let (mut ll, mut grad) = design.objective(&params, config.l2);
    let mut trace = vec![ll];
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iters {
        if inf_norm(&grad) <= config.tolerance {
            converged = true;
            break;
        }
        let direction = match config.optimizer {
            Optimizer::GradientAscent => grad,
            Optimizer::Newton => {
                let h = design.hessian(&params, config.l2);
                let neg: [[f64; PARAM_COUNT]; PARAM_COUNT] = std::array::from_fn(|i| std::array::from_fn(|j| -h[i][j]));
                let d = solve(neg, grad).unwrap_or(grad);
                if dot(&d, &grad) > 0.0 {
                    d
                } else {
                    grad
                }
            }
        };
        let slope = dot(&direction, &grad);
        if matches!(config.optimizer, Optimizer::Newton) {
            step = 1.0;
        }
        loop {
            let candidate: [f64; PARAM_COUNT] = std::array::from_fn(|j| params[j] + step * direction[j]);
            let (cand_ll, cand_grad) = design.objective(&candidate, config.l2);
            if !cand_ll.is_finite() && step <= MIN_STEP {
                return Err(Error::TrainingFailure("log-likelihood is not finite".into()));
            }
            if cand_ll.is_finite() && cand_ll >= ll + ARMIJO * step * slope {
                params = candidate;
                ll = cand_ll;
                grad = cand_grad;
                trace.push(ll);
                step = (step * 2.0).min(MAX_STEP);
                break;
            }
            step *= 0.5;
            if step < MIN_STEP {
                // No measurable ascent left along an ascent direction: the
                // objective is flat to machine precision.
                if cand_ll.is_finite() && cand_ll >= ll - 1e-12 * ll.abs().max(1.0) {
                    log::debug!("line search stalled at |g|∞ = {:e}", inf_norm(&grad));
                    return Ok((
                        params,
                        TrainingSummary { iterations, log_likelihood: ll, gradient_norm: inf_norm(&grad), converged: false, trace },
                    ));
                }
                return Err(Error::TrainingFailure(format!(
                    "log-likelihood decreased below the backtracking floor at iteration {iterations}"
                )));
            }
        }
        iterations += 1;
    }
    if !converged && inf_norm(&grad) <= config.tolerance {
        converged = true;
    }
    Ok((
        params,
        TrainingSummary { iterations, log_likelihood: ll, gradient_norm: inf_norm(&grad), converged, trace },
    ))
}

/// Objective and gradient of `model` on `examples`, using the model's own
/// standardizer and L2 setting. The gradient is ordered as
/// [`LogisticModel::params`].
pub fn log_likelihood_and_gradient(model: &LogisticModel, examples: &[LabeledExample]) -> (f64, [f64; PARAM_COUNT]) {
    Design::new(examples, &model.standardizer).objective(&model.params(), model.config.l2)
}

/// Seeded uniform sample of up to `n` items whose score lies within `band`
/// of 0.5. The sample keeps input order.
pub fn boundary_sample<P: Clone>(scored: &[(P, f64)], n: usize, band: f64, seed: u64) -> Vec<P> {
    let in_band: Vec<P> = scored
        .iter()
        .filter(|(_, s)| (0.5 - band..=0.5 + band).contains(s))
        .map(|(p, _)| p.clone())
        .collect();
    uniform_sample(&in_band, n, seed)
}

/// Seeded uniform sample of up to `n` items, in input order.
pub fn uniform_sample<P: Clone>(items: &[P], n: usize, seed: u64) -> Vec<P> {
    if n >= items.len() {
        return items.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, items.len(), n).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| items[i].clone()).collect()
}

/// Splits examples into (train, test), stratified by label: each class
/// contributes `round(test_fraction · class size)` test examples.
pub fn stratified_split(
    examples: &[LabeledExample],
    test_fraction: f64,
    seed: u64,
) -> (Vec<LabeledExample>, Vec<LabeledExample>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_mask = vec![false; examples.len()];
    for label in [false, true] {
        let class: Vec<usize> = (0..examples.len()).filter(|&i| examples[i].label == label).collect();
        let k = ((class.len() as f64) * test_fraction.clamp(0.0, 1.0)).round() as usize;
        for i in index::sample(&mut rng, class.len(), k) {
            test_mask[class[i]] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (e, is_test) in examples.iter().zip(test_mask) {
        if is_test { test.push(*e) } else { train.push(*e) }
    }
    (train, test)
}

/// Fraction of examples classified correctly at a 0.5 cutoff.
pub fn accuracy(model: &LogisticModel, examples: &[LabeledExample]) -> f64 {
    if examples.is_empty() {
        return 1.0;
    }
    let correct = examples.iter().filter(|e| (model.predict(&e.features) >= 0.5) == e.label).count();
    correct as f64 / examples.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct NamedValues {
    cast: f64,
    title: f64,
    year: f64,
    directors: f64,
    runtime: f64,
}

impl From<[f64; FEATURE_COUNT]> for NamedValues {
    fn from(v: [f64; FEATURE_COUNT]) -> Self {
        NamedValues { cast: v[0], title: v[1], year: v[2], directors: v[3], runtime: v[4] }
    }
}

impl From<NamedValues> for [f64; FEATURE_COUNT] {
    fn from(v: NamedValues) -> Self {
        [v.cast, v.title, v.year, v.directors, v.runtime]
    }
}

/// On-disk model layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    weights: NamedValues,
    intercept: f64,
    means: NamedValues,
    sds: NamedValues,
    #[serde(default)]
    config: TrainConfig,
    #[serde(default)]
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    training: Option<TrainingSummary>,
}

impl Serialize for LogisticModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelFile {
            weights: self.weights.into(),
            intercept: self.intercept,
            means: self.standardizer.means.into(),
            sds: self.standardizer.sds.into(),
            config: self.config,
            seed: self.config.seed,
            training: Some(self.summary.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogisticModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = ModelFile::deserialize(d)?;
        let sds: [f64; FEATURE_COUNT] = f.sds.into();
        if sds.iter().any(|&s| !(s > 0.0)) {
            return Err(serde::de::Error::custom("standard deviations must be positive"));
        }
        let mut config = f.config;
        config.seed = f.seed;
        Ok(LogisticModel {
            weights: f.weights.into(),
            intercept: f.intercept,
            standardizer: Standardizer { means: f.means.into(), sds },
            config,
            summary: f.training.unwrap_or_default(),
        })
    }
}
