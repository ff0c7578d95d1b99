//! Gradient-based inference of the background knowledge over a softmax
//! parametrization.
//!
//! All three trainers optimize logits `k` with `K = softmax(k)` by
//! mini-batch gradient descent with a fixed learning rate:
//!
//! - [`infer_pm`]: contrastive negative log-likelihood where each observed
//!   summary competes against sampled negative summaries of its document.
//! - [`infer_hreg`]: squared error between `a * theta_K` and the human
//!   scores, optionally learning the positive scale `a = exp(rho)`.
//! - [`infer_hpl`]: binary cross-entropy of `sigmoid(theta_i - theta_j)`
//!   over within-topic preference pairs.
//!
//! Gradients are analytic; [`finite_difference_gradient`] provides the
//! independent numerical check. Each trainer returns the epoch snapshot with
//! the lowest full-data loss and records the loss trace in the model
//! provenance.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, Dataset, TokenizerConfig, Topic, Vocabulary};
use crate::divergence::{self, UnitDistribution};
use crate::scoring::{KnowledgeModel, Provenance, ScoringConfig};
use crate::summarize;
use crate::{Error, Result};

/// Logits parametrizing a strictly positive distribution via softmax.
///
/// Adding a constant to all logits leaves the distribution unchanged;
/// serialization canonicalizes to mean-zero logits.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxParams {
    logits: Vec<f64>,
}

impl SoftmaxParams {
    pub fn zeros(n: usize) -> Self {
        Self {
            logits: vec![0.0; n],
        }
    }

    pub fn from_logits(logits: Vec<f64>) -> Result<Self> {
        if logits.is_empty() {
            return Err(Error::InvalidConfig("empty logit vector".into()));
        }
        if logits.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("non-finite logit".into()));
        }
        Ok(Self { logits })
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    /// Mean-zero logits, the canonical representative of the translation
    /// class.
    pub fn canonicalized(&self) -> Vec<f64> {
        let mean = self.logits.iter().sum::<f64>() / self.logits.len() as f64;
        self.logits.iter().map(|x| x - mean).collect()
    }

    pub fn to_distribution(&self) -> UnitDistribution {
        UnitDistribution::from_weights(&softmax_weights(&self.logits))
            .expect("softmax weights are positive")
    }
}

fn softmax_weights(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    logits.iter().map(|&x| (x - max).exp()).collect()
}

/// How the hReg scale parameter `a` is handled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegScale {
    Fixed(f64),
    Learned,
}

/// Hyperparameters shared by the gradient trainers.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Negative summaries sampled per positive (PM only).
    pub negatives_per_positive: usize,
    /// Word budget of each sampled negative summary (PM only).
    pub negative_budget: usize,
    /// Scale parameter of the regression loss (hReg only).
    pub reg_scale_a: RegScale,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            batch_size: 32,
            epochs: 200,
            seed: 0,
            negatives_per_positive: 4,
            negative_budget: 100,
            reg_scale_a: RegScale::Learned,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.negatives_per_positive == 0 {
            return Err(Error::InvalidConfig(
                "negatives_per_positive must be at least 1".into(),
            ));
        }
        if self.negative_budget == 0 {
            return Err(Error::InvalidConfig(
                "negative_budget must be at least 1".into(),
            ));
        }
        if let RegScale::Fixed(a) = self.reg_scale_a {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "reg_scale_a must be positive, got {a}"
                )));
            }
        }
        Ok(())
    }
}

/// A summary preference within one topic: the judged summary at `better`
/// has a strictly higher human score than the one at `worse`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub topic_id: String,
    pub topic_index: usize,
    pub better: usize,
    pub worse: usize,
}

/// All within-topic pairs of judged summaries with strictly different
/// scores, in deterministic (topic, i, j) order. Ties are skipped.
pub fn build_preference_pairs(dataset: &Dataset) -> Vec<PreferencePair> {
    let mut pairs = Vec::new();
    for (t, topic) in dataset.topics.iter().enumerate() {
        let scores: Vec<f64> = topic.judged_summaries.iter().map(|j| j.score).collect();
        for i in 0..scores.len() {
            for j in (i + 1)..scores.len() {
                let (better, worse) = if scores[i] > scores[j] {
                    (i, j)
                } else if scores[j] > scores[i] {
                    (j, i)
                } else {
                    continue;
                };
                pairs.push(PreferencePair {
                    topic_id: topic.id.clone(),
                    topic_index: t,
                    better,
                    worse,
                });
            }
        }
    }
    pairs
}

/// Uniformly samples sentences without replacement from the topic's
/// documents until the word budget is reached or exceeded, and returns the
/// concatenation.
pub fn sample_negative_summary(
    topic: &Topic,
    rng: &mut ChaCha12Rng,
    budget: usize,
) -> Result<String> {
    if budget == 0 {
        return Err(Error::InvalidConfig(
            "negative summary budget must be positive".into(),
        ));
    }
    let mut sentences: Vec<String> = Vec::new();
    for doc in &topic.documents {
        sentences.extend(summarize::split_into_sentences(doc));
    }
    if sentences.is_empty() {
        return Err(Error::DegenerateInput(format!(
            "topic `{}` has no sentences to sample from",
            topic.id
        )));
    }
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    order.shuffle(rng);
    let mut picked = Vec::new();
    let mut words = 0usize;
    for idx in order {
        picked.push(sentences[idx].clone());
        words += summarize::word_count(&sentences[idx]);
        if words >= budget {
            break;
        }
    }
    Ok(picked.join(" "))
}

/// Per-summary terms of `theta_K` that do not depend on `K`, precomputed so
/// training steps only touch the knowledge-dependent part.
#[derive(Debug, Clone)]
pub struct ScoredText {
    /// Smoothed summary distribution.
    s_smoothed: Vec<f64>,
    /// `H(s) - alpha * KL(s || d)`.
    const_part: f64,
    /// `sum_j s~_j ln s~_j`, the summary side of `KL(s || K)`.
    s_self_term: f64,
}

impl ScoredText {
    pub fn build(
        s: &UnitDistribution,
        d: &UnitDistribution,
        config: &ScoringConfig,
    ) -> Result<Self> {
        let h = divergence::entropy(s);
        let rel = divergence::kl(s, d, &config.smoothing)?;
        let s_smoothed = s.smoothed(&config.smoothing);
        let s_self_term = s_smoothed.iter().map(|&x| x * x.ln()).sum();
        Ok(Self {
            s_smoothed,
            const_part: h - config.alpha * rel,
            s_self_term,
        })
    }
}

/// Knowledge-dependent quantities shared by every example in a step.
struct KnowledgeState {
    /// `K = softmax(logits)`.
    probs: Vec<f64>,
    /// `ln K~_j` of the smoothed knowledge.
    log_smoothed: Vec<f64>,
    /// `K_j / (K_j + eps)`, the derivative of the smoothing map times `K_j`.
    ratio: Vec<f64>,
}

impl KnowledgeState {
    fn new(logits: &[f64], config: &ScoringConfig) -> Self {
        let weights = softmax_weights(logits);
        let z: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / z).collect();
        let eps = config.smoothing.epsilon;
        let norm = (1.0 + probs.len() as f64 * eps).ln();
        let log_smoothed = probs.iter().map(|&p| (p + eps).ln() - norm).collect();
        let ratio = probs.iter().map(|&p| p / (p + eps)).collect();
        Self {
            probs,
            log_smoothed,
            ratio,
        }
    }

    /// `theta_K` of a prepared summary.
    fn theta(&self, ex: &ScoredText, config: &ScoringConfig) -> f64 {
        let cross: f64 = ex
            .s_smoothed
            .iter()
            .zip(self.log_smoothed.iter())
            .map(|(s, lk)| s * lk)
            .sum();
        ex.const_part + config.beta * (ex.s_self_term - cross)
    }

    /// Adds `coeff * d theta / d logits` into `grad`. The derivative of
    /// `-beta * sum_j s~_j ln K~_j` through the softmax is
    /// `-beta * (g_m - K_m * sum_j g_j)` with `g_j = s~_j K_j / (K_j + eps)`.
    fn accumulate_theta_grad(
        &self,
        ex: &ScoredText,
        coeff: f64,
        config: &ScoringConfig,
        grad: &mut [f64],
    ) {
        let mut total = 0.0;
        for ((g, s), r) in grad
            .iter_mut()
            .zip(ex.s_smoothed.iter())
            .zip(self.ratio.iter())
        {
            // First pass stores g_m scaled; the shared term lands below.
            let gm = s * r;
            *g += coeff * (-config.beta) * gm;
            total += gm;
        }
        for (g, k) in grad.iter_mut().zip(self.probs.iter()) {
            *g += coeff * config.beta * k * total;
        }
    }
}

/// One contrastive observation: a positive summary and its sampled
/// negatives, all against the same document.
#[derive(Debug, Clone)]
pub struct PmExample {
    pub positive: ScoredText,
    pub negatives: Vec<ScoredText>,
}

/// One regression observation.
#[derive(Debug, Clone)]
pub struct RegExample {
    pub summary: ScoredText,
    pub human_score: f64,
}

/// One preference observation.
#[derive(Debug, Clone)]
pub struct PairExample {
    pub better: ScoredText,
    pub worse: ScoredText,
}

/// Mean contrastive negative log-likelihood over `examples` and its gradient
/// with respect to the logits.
///
/// Each positive is scored against its negatives in a `(1 + m)`-way softmax
/// over `theta_K` values.
pub fn pm_loss_and_grad(
    examples: &[PmExample],
    logits: &[f64],
    config: &ScoringConfig,
) -> (f64, Vec<f64>) {
    let state = KnowledgeState::new(logits, config);
    let mut loss = 0.0;
    let mut grad = vec![0.0; logits.len()];
    for ex in examples {
        let pos = state.theta(&ex.positive, config);
        let mut scores = Vec::with_capacity(1 + ex.negatives.len());
        scores.push(pos);
        for neg in &ex.negatives {
            scores.push(state.theta(neg, config));
        }
        let max = scores.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let z: f64 = scores.iter().map(|&s| (s - max).exp()).sum();
        let lse = max + z.ln();
        loss += lse - pos;
        // d loss / d theta_c = p_c - [c is positive].
        let p0 = (scores[0] - lse).exp();
        state.accumulate_theta_grad(&ex.positive, p0 - 1.0, config, &mut grad);
        for (neg, &score) in ex.negatives.iter().zip(scores.iter().skip(1)) {
            let p = (score - lse).exp();
            state.accumulate_theta_grad(neg, p, config, &mut grad);
        }
    }
    let inv = 1.0 / examples.len().max(1) as f64;
    loss *= inv;
    for g in &mut grad {
        *g *= inv;
    }
    (loss, grad)
}

/// Mean squared-error regression loss `0.5 * (a * theta - h)^2` with
/// `a = exp(ln_a)`, and its gradients with respect to the logits and `ln_a`.
pub fn hreg_loss_and_grad(
    examples: &[RegExample],
    logits: &[f64],
    ln_a: f64,
    config: &ScoringConfig,
) -> (f64, Vec<f64>, f64) {
    let state = KnowledgeState::new(logits, config);
    let a = ln_a.exp();
    let mut loss = 0.0;
    let mut grad = vec![0.0; logits.len()];
    let mut grad_ln_a = 0.0;
    for ex in examples {
        let theta = state.theta(&ex.summary, config);
        let residual = a * theta - ex.human_score;
        loss += 0.5 * residual * residual;
        state.accumulate_theta_grad(&ex.summary, residual * a, config, &mut grad);
        grad_ln_a += residual * theta * a;
    }
    let inv = 1.0 / examples.len().max(1) as f64;
    loss *= inv;
    grad_ln_a *= inv;
    for g in &mut grad {
        *g *= inv;
    }
    (loss, grad, grad_ln_a)
}

/// Mean binary cross-entropy of `sigmoid(theta_better - theta_worse)`
/// against the always-one preference label, and its logit gradient.
pub fn hpl_loss_and_grad(
    examples: &[PairExample],
    logits: &[f64],
    config: &ScoringConfig,
) -> (f64, Vec<f64>) {
    let state = KnowledgeState::new(logits, config);
    let mut loss = 0.0;
    let mut grad = vec![0.0; logits.len()];
    for ex in examples {
        let z = state.theta(&ex.better, config) - state.theta(&ex.worse, config);
        // -ln(sigmoid(z)) = softplus(-z), computed stably.
        loss += (-z).max(0.0) + (-z.abs()).exp().ln_1p();
        let sig = 1.0 / (1.0 + (-z).exp());
        let coeff = sig - 1.0;
        state.accumulate_theta_grad(&ex.better, coeff, config, &mut grad);
        state.accumulate_theta_grad(&ex.worse, -coeff, config, &mut grad);
    }
    let inv = 1.0 / examples.len().max(1) as f64;
    loss *= inv;
    for g in &mut grad {
        *g *= inv;
    }
    (loss, grad)
}

/// Central finite differences of `f` at `x` with step `h`. The independent
/// numerical check for the analytic gradients above.
pub fn finite_difference_gradient<F>(mut f: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for j in 0..x.len() {
        let orig = probe[j];
        probe[j] = orig + h;
        let up = f(&probe);
        probe[j] = orig - h;
        let down = f(&probe);
        probe[j] = orig;
        grad[j] = (up - down) / (2.0 * h);
    }
    grad
}

/// Builds the PM training set: one example per (topic, reference summary)
/// with freshly sampled negatives. Negatives are drawn once and stay fixed
/// for the whole run, which keeps the loss a well-defined function of the
/// logits.
pub fn build_pm_examples(
    dataset: &Dataset,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    train: &TrainConfig,
    scoring: &ScoringConfig,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<PmExample>> {
    let mut examples = Vec::new();
    for topic in &dataset.topics {
        if topic.reference_summaries.is_empty() {
            return Err(Error::DegenerateInput(format!(
                "topic `{}` has no reference summaries",
                topic.id
            )));
        }
        let sentence_count: usize = topic
            .documents
            .iter()
            .map(|d| summarize::split_into_sentences(d).len())
            .sum();
        if sentence_count < 2 {
            return Err(Error::DegenerateInput(format!(
                "topic `{}` is too short to sample negatives ({sentence_count} sentences)",
                topic.id
            )));
        }
        let d = corpus::topic_document_distribution(topic, vocab, tokenizer);
        for summary in &topic.reference_summaries {
            let s = corpus::text_to_distribution(summary, vocab, tokenizer);
            let positive = ScoredText::build(&s, &d, scoring)?;
            let mut negatives = Vec::with_capacity(train.negatives_per_positive);
            for _ in 0..train.negatives_per_positive {
                let text = sample_negative_summary(topic, rng, train.negative_budget)?;
                let neg = corpus::text_to_distribution(&text, vocab, tokenizer);
                negatives.push(ScoredText::build(&neg, &d, scoring)?);
            }
            examples.push(PmExample { positive, negatives });
        }
    }
    Ok(examples)
}

/// Builds the hReg training set: one example per judged summary.
pub fn build_reg_examples(
    dataset: &Dataset,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    scoring: &ScoringConfig,
) -> Result<Vec<RegExample>> {
    let mut examples = Vec::new();
    for topic in &dataset.topics {
        if topic.judged_summaries.is_empty() {
            continue;
        }
        let d = corpus::topic_document_distribution(topic, vocab, tokenizer);
        for judged in &topic.judged_summaries {
            let s = corpus::text_to_distribution(&judged.text, vocab, tokenizer);
            examples.push(RegExample {
                summary: ScoredText::build(&s, &d, scoring)?,
                human_score: judged.score,
            });
        }
    }
    if examples.is_empty() {
        return Err(Error::MissingJudgments(
            "regression needs judged summaries".into(),
        ));
    }
    Ok(examples)
}

/// Builds the hPL training set: one example per strict preference pair.
pub fn build_pair_examples(
    dataset: &Dataset,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    scoring: &ScoringConfig,
) -> Result<Vec<PairExample>> {
    let pairs = build_preference_pairs(dataset);
    if pairs.is_empty() {
        return Err(Error::MissingJudgments(
            "preference learning needs at least one strict preference pair".into(),
        ));
    }
    // Cache one ScoredText per judged summary.
    let mut cache: Vec<Vec<ScoredText>> = Vec::with_capacity(dataset.topics.len());
    for topic in &dataset.topics {
        let d = corpus::topic_document_distribution(topic, vocab, tokenizer);
        let mut scored = Vec::with_capacity(topic.judged_summaries.len());
        for judged in &topic.judged_summaries {
            let s = corpus::text_to_distribution(&judged.text, vocab, tokenizer);
            scored.push(ScoredText::build(&s, &d, scoring)?);
        }
        cache.push(scored);
    }
    Ok(pairs
        .iter()
        .map(|p| PairExample {
            better: cache[p.topic_index][p.better].clone(),
            worse: cache[p.topic_index][p.worse].clone(),
        })
        .collect())
}

/// Seeded index batches for one epoch.
fn epoch_batches(n: usize, batch_size: usize, rng: &mut ChaCha12Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.chunks(batch_size).map(|c| c.to_vec()).collect()
}

struct TrainOutcome {
    logits: Vec<f64>,
    ln_a: f64,
    trace: Vec<f64>,
}

/// Shared SGD loop. `full_loss` evaluates the whole training set;
/// `step` consumes one batch and updates the parameters.
fn run_sgd<FLoss, FStep>(
    n_examples: usize,
    n_units: usize,
    train: &TrainConfig,
    mut full_loss: FLoss,
    mut step: FStep,
) -> TrainOutcome
where
    FLoss: FnMut(&[f64], f64) -> f64,
    FStep: FnMut(&[usize], &mut Vec<f64>, &mut f64),
{
    let mut logits = vec![0.0; n_units];
    let mut ln_a = 0.0;
    let mut rng = ChaCha12Rng::seed_from_u64(train.seed);
    let mut trace = Vec::with_capacity(train.epochs + 1);
    let mut best_loss = full_loss(&logits, ln_a);
    trace.push(best_loss);
    let mut best = (logits.clone(), ln_a);
    for _ in 0..train.epochs {
        for batch in epoch_batches(n_examples, train.batch_size, &mut rng) {
            step(&batch, &mut logits, &mut ln_a);
        }
        let loss = full_loss(&logits, ln_a);
        trace.push(loss);
        if loss < best_loss {
            best_loss = loss;
            best = (logits.clone(), ln_a);
        }
    }
    TrainOutcome {
        logits: best.0,
        ln_a: best.1,
        trace,
    }
}

fn finish_model(
    algorithm: &str,
    dataset: &Dataset,
    vocab: &Vocabulary,
    train: &TrainConfig,
    outcome: TrainOutcome,
    extra: &[(&str, serde_json::Value)],
) -> Result<KnowledgeModel> {
    let params = SoftmaxParams::from_logits(outcome.logits)?;
    let canonical = SoftmaxParams::from_logits(params.canonicalized())?;
    let mut provenance = Provenance::new(algorithm)
        .with_param("learning_rate", train.learning_rate)
        .with_param("batch_size", train.batch_size as u64)
        .with_param("epochs", train.epochs as u64);
    provenance.seed = train.seed;
    provenance.data_slice = format!("{} ({} topics)", dataset.name, dataset.topics.len());
    provenance.loss_trace = Some(outcome.trace);
    for (key, value) in extra {
        provenance = provenance.with_param(key, value.clone());
    }
    KnowledgeModel::new(vocab.clone(), canonical.to_distribution(), provenance)
}

/// Fits `K` by contrastive likelihood: observed summaries must outscore
/// sampled negative summaries of the same documents.
pub fn infer_pm(
    dataset: &Dataset,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    train: &TrainConfig,
    scoring: &ScoringConfig,
) -> Result<KnowledgeModel> {
    train.validate()?;
    scoring.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(train.seed.wrapping_add(0x5EED_0001));
    let examples = build_pm_examples(dataset, vocab, tokenizer, train, scoring, &mut rng)?;
    let lr = train.learning_rate;
    let outcome = run_sgd(
        examples.len(),
        vocab.len(),
        train,
        |logits, _| pm_loss_and_grad(&examples, logits, scoring).0,
        |batch, logits, _| {
            let subset: Vec<PmExample> = batch.iter().map(|&i| examples[i].clone()).collect();
            let (_, grad) = pm_loss_and_grad(&subset, logits, scoring);
            for (x, g) in logits.iter_mut().zip(grad.iter()) {
                *x -= lr * g;
            }
        },
    );
    finish_model(
        "pm",
        dataset,
        vocab,
        train,
        outcome,
        &[
            (
                "negatives_per_positive",
                (train.negatives_per_positive as u64).into(),
            ),
            ("negative_budget", (train.negative_budget as u64).into()),
        ],
    )
}

/// Fits `K` by regressing `a * theta_K` onto the human scores.
pub fn infer_hreg(
    dataset: &Dataset,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    train: &TrainConfig,
    scoring: &ScoringConfig,
) -> Result<KnowledgeModel> {
    train.validate()?;
    scoring.validate()?;
    let examples = build_reg_examples(dataset, vocab, tokenizer, scoring)?;
    let lr = train.learning_rate;
    let (init_ln_a, learn_a) = match train.reg_scale_a {
        RegScale::Fixed(a) => (a.ln(), false),
        RegScale::Learned => (0.0, true),
    };
    let mut outcome = run_sgd(
        examples.len(),
        vocab.len(),
        train,
        |logits, ln_a| hreg_loss_and_grad(&examples, logits, ln_a, scoring).0,
        |batch, logits, ln_a| {
            let subset: Vec<RegExample> = batch.iter().map(|&i| examples[i].clone()).collect();
            let (_, grad, grad_ln_a) = hreg_loss_and_grad(&subset, logits, *ln_a, scoring);
            for (x, g) in logits.iter_mut().zip(grad.iter()) {
                *x -= lr * g;
            }
            if learn_a {
                *ln_a -= lr * grad_ln_a;
            }
        },
    );
    if !learn_a {
        outcome.ln_a = init_ln_a;
    }
    let a_final = outcome.ln_a.exp();
    finish_model(
        "hreg",
        dataset,
        vocab,
        train,
        outcome,
        &[
            ("scale_a", a_final.into()),
            ("scale_a_learned", learn_a.into()),
        ],
    )
}

/// Fits `K` by pairwise preference learning over the order induced by the
/// human scores.
pub fn infer_hpl(
    dataset: &Dataset,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    train: &TrainConfig,
    scoring: &ScoringConfig,
) -> Result<KnowledgeModel> {
    train.validate()?;
    scoring.validate()?;
    let examples = build_pair_examples(dataset, vocab, tokenizer, scoring)?;
    let lr = train.learning_rate;
    let outcome = run_sgd(
        examples.len(),
        vocab.len(),
        train,
        |logits, _| hpl_loss_and_grad(&examples, logits, scoring).0,
        |batch, logits, _| {
            let subset: Vec<PairExample> = batch.iter().map(|&i| examples[i].clone()).collect();
            let (_, grad) = hpl_loss_and_grad(&subset, logits, scoring);
            for (x, g) in logits.iter_mut().zip(grad.iter()) {
                *x -= lr * g;
            }
        },
    );
    finish_model(
        "hpl",
        dataset,
        vocab,
        train,
        outcome,
        &[("pairs", (examples.len() as u64).into())],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::JudgedSummary;
    use approx::assert_abs_diff_eq;

    fn topic(id: &str, docs: &[&str], refs: &[&str], judged: &[(&str, f64)]) -> Topic {
        Topic {
            id: id.into(),
            documents: docs.iter().map(|s| s.to_string()).collect(),
            reference_summaries: refs.iter().map(|s| s.to_string()).collect(),
            judged_summaries: judged
                .iter()
                .map(|(t, s)| JudgedSummary {
                    text: t.to_string(),
                    score: *s,
                    annotator: None,
                })
                .collect(),
            tags: Default::default(),
        }
    }

    fn small_dataset() -> (Dataset, Vocabulary) {
        let ds = Dataset::new(
            "small",
            vec![
                topic(
                    "t0",
                    &["Apple banana cherry. Banana cherry date. Apple date egg."],
                    &["apple banana"],
                    &[("apple apple banana", 3.0), ("date egg", 1.0), ("cherry date", 2.0)],
                ),
                topic(
                    "t1",
                    &["Egg fig grape. Fig grape apple. Grape egg banana."],
                    &["fig grape"],
                    &[("fig fig grape", 3.0), ("apple banana", 0.5)],
                ),
            ],
        )
        .unwrap();
        let vocab = corpus::build_vocabulary(&ds, &TokenizerConfig::default()).unwrap();
        (ds, vocab)
    }

    fn relative_error(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-2))
            .fold(0.0, f64::max)
    }

    #[test]
    fn softmax_params_invariants() {
        let p = SoftmaxParams::from_logits(vec![0.3, -1.2, 2.0, 0.0]).unwrap();
        let d = p.to_distribution();
        let sum: f64 = d.probs().iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        assert!(d.probs().iter().all(|&x| x > 0.0));

        // Translation invariance of the induced distribution.
        let shifted =
            SoftmaxParams::from_logits(p.logits().iter().map(|x| x + 5.0).collect()).unwrap();
        for (a, b) in d.probs().iter().zip(shifted.to_distribution().probs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }

        let canonical = p.canonicalized();
        let mean: f64 = canonical.iter().sum::<f64>() / canonical.len() as f64;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn preference_pairs_hand_counts() {
        let ds = Dataset::new(
            "p",
            vec![
                topic("t0", &["a."], &[], &[("x", 3.0), ("y", 1.0)]),
                topic("t1", &["a."], &[], &[("x", 2.0), ("y", 2.0)]),
                topic("t2", &["a."], &[], &[("x", 3.0), ("y", 2.0), ("z", 1.0)]),
            ],
        )
        .unwrap();
        let pairs = build_preference_pairs(&ds);
        // Topic t0: one pair; t1: tie skipped; t2: C(3,2) = 3 pairs.
        assert_eq!(pairs.len(), 4);
        assert_eq!(pairs[0].topic_id, "t0");
        assert_eq!((pairs[0].better, pairs[0].worse), (0, 1));
        assert!(pairs.iter().all(|p| p.topic_id != "t1"));
        let t2: Vec<(usize, usize)> = pairs
            .iter()
            .filter(|p| p.topic_id == "t2")
            .map(|p| (p.better, p.worse))
            .collect();
        assert_eq!(t2, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn negative_sampling_is_deterministic_and_guarded() {
        let t = topic(
            "t",
            &["First sentence here. Second sentence there. Third one now."],
            &[],
            &[],
        );
        let mut rng1 = ChaCha12Rng::seed_from_u64(9);
        let mut rng2 = ChaCha12Rng::seed_from_u64(9);
        let a = sample_negative_summary(&t, &mut rng1, 5).unwrap();
        let b = sample_negative_summary(&t, &mut rng2, 5).unwrap();
        assert_eq!(a, b);

        let single = topic("s", &["Only sentence."], &[], &[]);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        assert_eq!(
            sample_negative_summary(&single, &mut rng, 50).unwrap(),
            "Only sentence."
        );
        assert!(matches!(
            sample_negative_summary(&single, &mut rng, 0),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn pm_gradient_matches_finite_differences() {
        let (ds, vocab) = small_dataset();
        let scoring = ScoringConfig::default();
        let train = TrainConfig::default();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let examples =
            build_pm_examples(&ds, &vocab, &TokenizerConfig::default(), &train, &scoring, &mut rng)
                .unwrap();
        let mut lrng = ChaCha12Rng::seed_from_u64(11);
        let logits: Vec<f64> = (0..vocab.len()).map(|_| lrng.gen_range(-0.5..0.5)).collect();
        let (_, analytic) = pm_loss_and_grad(&examples, &logits, &scoring);
        let fd = finite_difference_gradient(
            |x| pm_loss_and_grad(&examples, x, &scoring).0,
            &logits,
            1e-5,
        );
        assert!(relative_error(&analytic, &fd) < 1e-5);
    }

    #[test]
    fn hreg_gradient_matches_finite_differences() {
        let (ds, vocab) = small_dataset();
        let scoring = ScoringConfig::default();
        let examples =
            build_reg_examples(&ds, &vocab, &TokenizerConfig::default(), &scoring).unwrap();
        let mut lrng = ChaCha12Rng::seed_from_u64(13);
        let logits: Vec<f64> = (0..vocab.len()).map(|_| lrng.gen_range(-0.5..0.5)).collect();
        let ln_a = 0.2;
        let (_, analytic, analytic_ln_a) = hreg_loss_and_grad(&examples, &logits, ln_a, &scoring);
        let fd = finite_difference_gradient(
            |x| hreg_loss_and_grad(&examples, x, ln_a, &scoring).0,
            &logits,
            1e-5,
        );
        assert!(relative_error(&analytic, &fd) < 1e-5);
        let fd_ln_a = finite_difference_gradient(
            |x| hreg_loss_and_grad(&examples, &logits, x[0], &scoring).0,
            &[ln_a],
            1e-5,
        )[0];
        assert!(relative_error(&[analytic_ln_a], &[fd_ln_a]) < 1e-5);
    }

    #[test]
    fn hpl_gradient_matches_finite_differences() {
        let (ds, vocab) = small_dataset();
        let scoring = ScoringConfig::default();
        let examples =
            build_pair_examples(&ds, &vocab, &TokenizerConfig::default(), &scoring).unwrap();
        let mut lrng = ChaCha12Rng::seed_from_u64(17);
        let logits: Vec<f64> = (0..vocab.len()).map(|_| lrng.gen_range(-0.5..0.5)).collect();
        let (_, analytic) = hpl_loss_and_grad(&examples, &logits, &scoring);
        let fd = finite_difference_gradient(
            |x| hpl_loss_and_grad(&examples, x, &scoring).0,
            &logits,
            1e-5,
        );
        assert!(relative_error(&analytic, &fd) < 1e-5);
    }

    #[test]
    fn losses_are_invariant_under_logit_translation() {
        let (ds, vocab) = small_dataset();
        let scoring = ScoringConfig::default();
        let train = TrainConfig::default();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let pm =
            build_pm_examples(&ds, &vocab, &TokenizerConfig::default(), &train, &scoring, &mut rng)
                .unwrap();
        let reg = build_reg_examples(&ds, &vocab, &TokenizerConfig::default(), &scoring).unwrap();
        let pl = build_pair_examples(&ds, &vocab, &TokenizerConfig::default(), &scoring).unwrap();
        let mut lrng = ChaCha12Rng::seed_from_u64(23);
        let logits: Vec<f64> = (0..vocab.len()).map(|_| lrng.gen_range(-1.0..1.0)).collect();
        let shifted: Vec<f64> = logits.iter().map(|x| x + 3.75).collect();
        assert_abs_diff_eq!(
            pm_loss_and_grad(&pm, &logits, &scoring).0,
            pm_loss_and_grad(&pm, &shifted, &scoring).0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            hreg_loss_and_grad(&reg, &logits, 0.1, &scoring).0,
            hreg_loss_and_grad(&reg, &shifted, 0.1, &scoring).0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            hpl_loss_and_grad(&pl, &logits, &scoring).0,
            hpl_loss_and_grad(&pl, &shifted, &scoring).0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn hpl_loss_is_invariant_under_affine_score_transforms() {
        let (ds, _) = small_dataset();
        // Transform h -> 2h + 3: the induced pairs are identical, so the
        // training loss is exactly equal.
        let mut transformed = ds.clone();
        for t in &mut transformed.topics {
            for j in &mut t.judged_summaries {
                j.score = 2.0 * j.score + 3.0;
            }
        }
        let vocab = corpus::build_vocabulary(&ds, &TokenizerConfig::default()).unwrap();
        let scoring = ScoringConfig::default();
        let a = build_pair_examples(&ds, &vocab, &TokenizerConfig::default(), &scoring).unwrap();
        let b =
            build_pair_examples(&transformed, &vocab, &TokenizerConfig::default(), &scoring)
                .unwrap();
        let mut lrng = ChaCha12Rng::seed_from_u64(29);
        let logits: Vec<f64> = (0..vocab.len()).map(|_| lrng.gen_range(-1.0..1.0)).collect();
        let la = hpl_loss_and_grad(&a, &logits, &scoring).0;
        let lb = hpl_loss_and_grad(&b, &logits, &scoring).0;
        assert_eq!(la, lb);
    }

    #[test]
    fn pm_training_reduces_loss_and_is_deterministic() {
        let (ds, vocab) = small_dataset();
        let scoring = ScoringConfig::default();
        let train = TrainConfig {
            epochs: 30,
            ..Default::default()
        };
        let tok = TokenizerConfig::default();
        let m1 = infer_pm(&ds, &vocab, &tok, &train, &scoring).unwrap();
        let m2 = infer_pm(&ds, &vocab, &tok, &train, &scoring).unwrap();
        assert_eq!(
            m1.k.probs().iter().map(|p| p.to_bits()).collect::<Vec<_>>(),
            m2.k.probs().iter().map(|p| p.to_bits()).collect::<Vec<_>>()
        );
        let trace = m1.provenance.loss_trace.as_ref().unwrap();
        assert!(trace.iter().last().unwrap() <= trace.first().unwrap());
        // Strictly positive distribution.
        assert!(m1.k.probs().iter().all(|&p| p > 0.0));
    }

    #[test]
    fn hreg_handles_constant_targets() {
        let ds = Dataset::new(
            "const",
            vec![topic(
                "t0",
                &["Alpha beta gamma. Beta gamma delta."],
                &["alpha beta"],
                &[("alpha beta", 2.0), ("gamma delta", 2.0), ("beta gamma", 2.0)],
            )],
        )
        .unwrap();
        let vocab = corpus::build_vocabulary(&ds, &TokenizerConfig::default()).unwrap();
        let train = TrainConfig {
            epochs: 20,
            ..Default::default()
        };
        let model = infer_hreg(
            &ds,
            &vocab,
            &TokenizerConfig::default(),
            &train,
            &ScoringConfig::default(),
        )
        .unwrap();
        assert!(model.k.probs().iter().all(|p| p.is_finite() && *p > 0.0));
    }

    #[test]
    fn hreg_fits_realizable_targets() {
        // Judgments generated exactly as a0 * theta_{K0} must be driven to
        // near-zero loss.
        let (mut ds, vocab) = small_dataset();
        let scoring = ScoringConfig::default();
        let k0_logits: Vec<f64> = (0..vocab.len())
            .map(|i| if i % 2 == 0 { 0.6 } else { -0.6 })
            .collect();
        let k0 = SoftmaxParams::from_logits(k0_logits).unwrap().to_distribution();
        let a0 = 1.3;
        let tok = TokenizerConfig::default();
        for t in &mut ds.topics {
            let d = corpus::topic_document_distribution(t, &vocab, &tok);
            for j in &mut t.judged_summaries {
                let s = corpus::text_to_distribution(&j.text, &vocab, &tok);
                j.score = a0 * crate::scoring::theta_with_k(&s, &d, &k0, &scoring).unwrap();
            }
        }
        let examples = build_reg_examples(&ds, &vocab, &tok, &scoring).unwrap();
        let train = TrainConfig {
            epochs: 2000,
            batch_size: examples.len(),
            learning_rate: 0.5,
            ..Default::default()
        };
        let model = infer_hreg(&ds, &vocab, &tok, &train, &scoring).unwrap();
        let trace = model.provenance.loss_trace.as_ref().unwrap();
        let initial = trace[0];
        let final_loss = trace.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(
            final_loss < 1e-3 * initial,
            "final {final_loss} vs initial {initial}"
        );
    }

    #[test]
    fn hpl_separates_a_single_pair() {
        let ds = Dataset::new(
            "pair",
            vec![topic(
                "t0",
                &["Alpha beta gamma delta. Beta gamma alpha."],
                &["alpha beta"],
                &[("alpha alpha alpha", 2.0), ("delta delta delta", 1.0)],
            )],
        )
        .unwrap();
        let vocab = corpus::build_vocabulary(&ds, &TokenizerConfig::default()).unwrap();
        let scoring = ScoringConfig::default();
        let tok = TokenizerConfig::default();
        let train = TrainConfig {
            epochs: 200,
            ..Default::default()
        };
        let model = infer_hpl(&ds, &vocab, &tok, &train, &scoring).unwrap();
        let topic = &ds.topics[0];
        let d = corpus::topic_document_distribution(topic, &vocab, &tok);
        let better = corpus::text_to_distribution("alpha alpha alpha", &vocab, &tok);
        let worse = corpus::text_to_distribution("delta delta delta", &vocab, &tok);
        let tb = crate::scoring::theta(&better, &d, &model, &scoring).unwrap();
        let tw = crate::scoring::theta(&worse, &d, &model, &scoring).unwrap();
        let sigma = 1.0 / (1.0 + (-(tb - tw)).exp());
        assert!(sigma > 0.5, "sigma = {sigma}");
    }

    #[test]
    fn hpl_without_pairs_is_an_error() {
        let ds = Dataset::new(
            "nopairs",
            vec![topic("t0", &["A b."], &["a"], &[("x", 1.0), ("y", 1.0)])],
        )
        .unwrap();
        let vocab = corpus::build_vocabulary(&ds, &TokenizerConfig::default()).unwrap();
        assert!(matches!(
            infer_hpl(
                &ds,
                &vocab,
                &TokenizerConfig::default(),
                &TrainConfig::default(),
                &ScoringConfig::default()
            ),
            Err(Error::MissingJudgments(_))
        ));
    }

    #[test]
    fn pm_rejects_topics_with_too_few_sentences() {
        let ds = Dataset::new(
            "short",
            vec![topic("t0", &["Single sentence only."], &["single"], &[])],
        )
        .unwrap();
        let vocab = corpus::build_vocabulary(&ds, &TokenizerConfig::default()).unwrap();
        assert!(matches!(
            infer_pm(
                &ds,
                &vocab,
                &TokenizerConfig::default(),
                &TrainConfig::default(),
                &ScoringConfig::default()
            ),
            Err(Error::DegenerateInput(_))
        ));
    }
}
