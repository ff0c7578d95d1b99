//! Closed-form inference of the background knowledge by direct score
//! maximization, plus a numeric optimizer used to verify the closed forms.
//!
//! Both algorithms maximize the summed summary score of the observed
//! `(document, reference summary)` pairs, regularized toward a prior `P`:
//!
//! ```text
//! F(K) = sum_i theta_K(S_i, D_i) - gamma * sum_i GKL(P_i || K)
//! ```
//!
//! The regularizer is applied once per pair. With the document prior,
//! `P_i = D_i` and `GKL` is the ordinary KL divergence. With the uniform
//! prior, `P_i` assigns weight one to every unit (the generalized, unscaled
//! form), which is what makes `gamma >= 1` the positivity threshold of the
//! closed-form solution.
//!
//! Maximizing `F` over the simplex gives (on the smoothed distributions):
//!
//! - uniform prior:  `K_j` proportional to `sum_i (gamma - P_Si(w_j))`
//! - document prior: `K_j` proportional to `sum_i (gamma * P_Di(w_j) - P_Si(w_j))`
//!
//! Per-pair nonnegativity of the document-prior solution needs `gamma` at
//! least the **maximum** over pairs and units of `P_S(w_j) / P_D(w_j)`;
//! `gamma = auto` derives that bound from the dataset. A smaller fixed gamma
//! is accepted as long as the accumulated solution stays nonnegative
//! ([`min_dataset_gamma_document`] gives the smallest such value).

use serde::{Deserialize, Serialize};

use crate::corpus::{self, Dataset, TokenizerConfig, Vocabulary};
use crate::divergence::{SmoothingConfig, UnitDistribution};
use crate::scoring::{self, KnowledgeModel, Provenance, ScoringConfig};
use crate::{Error, Result};

/// The regularization prior of the score-maximization objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prior {
    Uniform,
    Document,
}

/// Regularization strength: fixed, or the smallest admissible value for the
/// dataset times a 1% safety factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSpec {
    Fixed(f64),
    Auto,
}

/// Settings for the closed-form inference algorithms.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClosedFormConfig {
    pub gamma: GammaSpec,
    pub prior: Prior,
    pub smoothing: SmoothingConfig,
}

impl Default for ClosedFormConfig {
    fn default() -> Self {
        Self {
            gamma: GammaSpec::Auto,
            prior: Prior::Document,
            smoothing: SmoothingConfig::default(),
        }
    }
}

/// One (document, reference summary) observation with its smoothed
/// distributions.
struct Pair {
    s: UnitDistribution,
    d: UnitDistribution,
    s_smoothed: Vec<f64>,
    d_smoothed: Vec<f64>,
}

/// Extracts one pair per (topic, reference summary). Every topic must have a
/// reference summary.
fn extract_pairs(
    dataset: &Dataset,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    smoothing: &SmoothingConfig,
) -> Result<Vec<Pair>> {
    if dataset.topics.is_empty() {
        return Err(Error::DegenerateInput("dataset has no topics".into()));
    }
    let mut pairs = Vec::new();
    for topic in &dataset.topics {
        if topic.reference_summaries.is_empty() {
            return Err(Error::DegenerateInput(format!(
                "topic `{}` has no reference summaries",
                topic.id
            )));
        }
        let d = corpus::topic_document_distribution(topic, vocab, tokenizer);
        for summary in &topic.reference_summaries {
            let s = corpus::text_to_distribution(summary, vocab, tokenizer);
            pairs.push(Pair {
                s_smoothed: s.smoothed(smoothing),
                d_smoothed: d.smoothed(smoothing),
                s,
                d: d.clone(),
            });
        }
    }
    Ok(pairs)
}

/// The smallest gamma for which every per-pair term of the document-prior
/// solution is nonnegative: the maximum over pairs and units of
/// `P_S(w_j) / P_D(w_j)` on the smoothed distributions. This is what
/// `gamma = auto` uses; it is conservative on sparse text distributions.
pub fn min_admissible_gamma_document(
    dataset: &Dataset,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    smoothing: &SmoothingConfig,
) -> Result<f64> {
    let pairs = extract_pairs(dataset, vocab, tokenizer, smoothing)?;
    let mut bound = 0.0f64;
    for pair in &pairs {
        for (s, d) in pair.s_smoothed.iter().zip(pair.d_smoothed.iter()) {
            bound = bound.max(s / d);
        }
    }
    Ok(bound)
}

/// The smallest gamma for which the *accumulated* document-prior solution is
/// nonnegative on this dataset: the maximum over units of
/// `sum_i P_Si(w_j) / sum_i P_Di(w_j)`. Smaller than the per-pair bound and
/// usually far less uniform-pulling; a fixed gamma at or above this value is
/// accepted by [`infer_ms_d`].
pub fn min_dataset_gamma_document(
    dataset: &Dataset,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    smoothing: &SmoothingConfig,
) -> Result<f64> {
    let pairs = extract_pairs(dataset, vocab, tokenizer, smoothing)?;
    let mut s_sum = vec![0.0f64; vocab.len()];
    let mut d_sum = vec![0.0f64; vocab.len()];
    for pair in &pairs {
        for j in 0..vocab.len() {
            s_sum[j] += pair.s_smoothed[j];
            d_sum[j] += pair.d_smoothed[j];
        }
    }
    let mut bound = 0.0f64;
    for (s, d) in s_sum.iter().zip(d_sum.iter()) {
        bound = bound.max(s / d);
    }
    Ok(bound)
}

const AUTO_GAMMA_MARGIN: f64 = 1.01;

fn resolve_gamma(
    config: &ClosedFormConfig,
    dataset: &Dataset,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
) -> Result<f64> {
    match (config.gamma, config.prior) {
        (GammaSpec::Fixed(g), _) => {
            if !g.is_finite() || g <= 0.0 {
                return Err(Error::InvalidGamma(format!(
                    "gamma must be positive and finite, got {g}"
                )));
            }
            Ok(g)
        }
        (GammaSpec::Auto, Prior::Uniform) => Ok(1.0),
        (GammaSpec::Auto, Prior::Document) => {
            let bound =
                min_admissible_gamma_document(dataset, vocab, tokenizer, &config.smoothing)?;
            Ok(bound * AUTO_GAMMA_MARGIN)
        }
    }
}

fn provenance(
    algorithm: &str,
    dataset: &Dataset,
    gamma: f64,
    config: &ClosedFormConfig,
) -> Provenance {
    Provenance::new(algorithm)
        .with_param("gamma", gamma)
        .with_param("epsilon", config.smoothing.epsilon)
        .with_param("topics", dataset.topics.len() as u64)
}

/// Maximum-score inference with the uniform prior. The solution counts how
/// rarely each unit appears in reference summaries:
/// `K_j` proportional to `sum_i (gamma - P_Si(w_j))`.
///
/// Documents never enter the solution.
pub fn infer_ms_u(
    dataset: &Dataset,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    config: &ClosedFormConfig,
) -> Result<KnowledgeModel> {
    if config.prior != Prior::Uniform {
        return Err(Error::InvalidConfig(
            "infer_ms_u requires prior = uniform".into(),
        ));
    }
    let gamma = resolve_gamma(config, dataset, vocab, tokenizer)?;
    if gamma < 1.0 {
        return Err(Error::InvalidGamma(format!(
            "uniform prior requires gamma >= 1 for positivity, got {gamma}"
        )));
    }
    let pairs = extract_pairs(dataset, vocab, tokenizer, &config.smoothing)?;
    let mut weights = vec![0.0f64; vocab.len()];
    for pair in &pairs {
        for (w, s) in weights.iter_mut().zip(pair.s_smoothed.iter()) {
            *w += gamma - s;
        }
    }
    let k = UnitDistribution::from_weights(&weights)?;
    KnowledgeModel::new(vocab.clone(), k, provenance("ms-u", dataset, gamma, config))
}

/// Tiny negative accumulations are rounding noise and get clamped; anything
/// worse means gamma is genuinely too small.
const NEGATIVITY_TOLERANCE: f64 = 1e-12;

/// Maximum-score inference with the document prior. Units prominent in the
/// documents but rarely selected into summaries receive high mass:
/// `K_j` proportional to `sum_i (gamma * P_Di(w_j) - P_Si(w_j))`.
///
/// Accumulated entries that come out negative beyond rounding noise mean
/// gamma is too small for the dataset and produce an error; entries within
/// the tolerance are clamped to zero.
pub fn infer_ms_d(
    dataset: &Dataset,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    config: &ClosedFormConfig,
) -> Result<KnowledgeModel> {
    if config.prior != Prior::Document {
        return Err(Error::InvalidConfig(
            "infer_ms_d requires prior = document".into(),
        ));
    }
    let gamma = resolve_gamma(config, dataset, vocab, tokenizer)?;
    let pairs = extract_pairs(dataset, vocab, tokenizer, &config.smoothing)?;
    let mut weights = vec![0.0f64; vocab.len()];
    for pair in &pairs {
        for (j, w) in weights.iter_mut().enumerate() {
            *w += gamma * pair.d_smoothed[j] - pair.s_smoothed[j];
        }
    }
    for w in &mut weights {
        if *w < 0.0 {
            if *w < -NEGATIVITY_TOLERANCE {
                return Err(Error::PositivityViolated(format!(
                    "accumulated weight {w} is negative; gamma too small for this dataset"
                )));
            }
            *w = 0.0;
        }
    }
    let k = UnitDistribution::from_weights(&weights)?;
    KnowledgeModel::new(vocab.clone(), k, provenance("ms-d", dataset, gamma, config))
}

/// Iteration budget for the numeric maximizer.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OracleBudget {
    /// Maximum ascent iterations per restart.
    pub max_iters: usize,
    /// Seed for the random restart points.
    pub seed: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_iters: 1500,
            seed: 20,
        }
    }
}

const ORACLE_RESTARTS: usize = 20;
const ORACLE_MAX_UNITS: usize = 8;

/// Maximizes the score-maximization objective numerically by projected
/// gradient ascent with 20 random restarts and finite-difference gradients.
///
/// This path never uses the closed-form solutions: the objective is
/// evaluated through the scoring function itself, so it serves as an
/// independent check of the analytic results. Desk-scale only (`n <= 8`).
pub fn maximize_fms_numeric(
    dataset: &Dataset,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    config: &ClosedFormConfig,
    budget: &OracleBudget,
) -> Result<UnitDistribution> {
    if vocab.len() > ORACLE_MAX_UNITS {
        return Err(Error::DegenerateInput(format!(
            "numeric maximizer supports at most {ORACLE_MAX_UNITS} units, got {}",
            vocab.len()
        )));
    }
    let gamma = resolve_gamma(config, dataset, vocab, tokenizer)?;
    let pairs = extract_pairs(dataset, vocab, tokenizer, &config.smoothing)?;
    let n = vocab.len();
    if n == 1 {
        return Ok(UnitDistribution::uniform(1));
    }
    let scoring_cfg = ScoringConfig {
        alpha: 1.0,
        beta: 1.0,
        smoothing: config.smoothing,
    };

    let objective = |k_raw: &[f64]| -> f64 {
        fms_value(&pairs, k_raw, gamma, config.prior, &scoring_cfg)
    };

    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(budget.seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for restart in 0..ORACLE_RESTARTS {
        let start = if restart == 0 {
            vec![1.0 / n as f64; n]
        } else {
            // Dirichlet(1) draw via normalized exponentials.
            let e: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
            let z: f64 = e.iter().sum();
            e.into_iter().map(|x| x / z).collect()
        };
        let (point, value) = ascend(&objective, start, budget.max_iters, config.smoothing.epsilon);
        if best.as_ref().map_or(true, |(_, bv)| value > *bv) {
            best = Some((point, value));
        }
    }
    let (point, _) = best.expect("at least one restart ran");
    UnitDistribution::new(point)
}

/// The objective value at a raw (possibly slightly off-simplex) point.
fn fms_value(
    pairs: &[Pair],
    k_raw: &[f64],
    gamma: f64,
    prior: Prior,
    scoring_cfg: &ScoringConfig,
) -> f64 {
    let k = UnitDistribution::new_unchecked(k_raw.to_vec());
    let mut total = 0.0;
    for pair in pairs {
        total += scoring::theta_with_k(&pair.s, &pair.d, &k, scoring_cfg)
            .expect("equal lengths by construction");
    }
    let k_smoothed = k.smoothed(&scoring_cfg.smoothing);
    let mut reg = 0.0;
    match prior {
        Prior::Uniform => {
            // Unit weight per unit and pair; the prior's own entropy term is
            // constant and dropped.
            let per_pair: f64 = k_smoothed.iter().map(|&x| -x.ln()).sum();
            reg = pairs.len() as f64 * per_pair;
        }
        Prior::Document => {
            for pair in pairs {
                for (d, kj) in pair.d_smoothed.iter().zip(k_smoothed.iter()) {
                    reg += d * (d / kj).ln();
                }
            }
        }
    }
    total - gamma * reg
}

/// Projected gradient ascent with backtracking line search. Gradients come
/// from central finite differences of the objective.
fn ascend(
    objective: &dyn Fn(&[f64]) -> f64,
    mut point: Vec<f64>,
    max_iters: usize,
    epsilon: f64,
) -> (Vec<f64>, f64) {
    // The probe step must stay below the smoothing floor so that smoothed
    // entries remain positive at `k_j - h`.
    let h = (epsilon / 10.0).min(1e-7);
    let mut value = objective(&point);
    for _ in 0..max_iters {
        let grad = fd_gradient(objective, &point, h);
        let mut improved = false;
        let mut step = 1.0;
        for _ in 0..40 {
            let cand: Vec<f64> = point
                .iter()
                .zip(grad.iter())
                .map(|(p, g)| p + step * g)
                .collect();
            let cand = project_to_simplex(&cand);
            let cand_value = objective(&cand);
            if cand_value > value + 1e-13 {
                point = cand;
                value = cand_value;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (point, value)
}

fn fd_gradient(objective: &dyn Fn(&[f64]) -> f64, point: &[f64], h: f64) -> Vec<f64> {
    let mut grad = vec![0.0; point.len()];
    let mut probe = point.to_vec();
    for j in 0..point.len() {
        let orig = probe[j];
        probe[j] = orig + h;
        let up = objective(&probe);
        probe[j] = orig - h;
        let down = objective(&probe);
        probe[j] = orig;
        grad[j] = (up - down) / (2.0 * h);
    }
    grad
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    let mut found = false;
    for (i, &x) in sorted.iter().enumerate() {
        cumsum += x;
        let candidate = (cumsum - 1.0) / (i + 1) as f64;
        if x - candidate > 0.0 {
            tau = candidate;
        } else {
            found = true;
            break;
        }
    }
    if !found {
        tau = (cumsum - 1.0) / n as f64;
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}
