//! Planted-truth synthetic corpus generator.
//!
//! A ground-truth knowledge distribution `K*` is drawn first; every topic
//! then gets a document distribution, an ideal summary distribution
//! (the analytic maximizer of the score, proportional to `D / K*`), noisy
//! reference summaries realized from it, and system summaries placed at
//! controlled divergences from the ideal. Judged scores are the true score
//! of each system's target distribution plus optional gaussian noise and a
//! per-annotator additive bias.
//!
//! Design choices that keep recovery experiments crisp:
//!
//! - Summary texts are realized with systematic (low-discrepancy) sampling,
//!   so the empirical distribution of a summary deviates from its target by
//!   less than one token's worth of mass per unit.
//! - System targets sit on an increasing divergence ladder
//!   (`system_divergence_min + q * system_divergence_step` nats from the
//!   ideal summary), which separates their scores by more than the
//!   realization noise. References therefore rank strictly first on
//!   noise-free data, and score order is stable enough to be learnable.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, JudgedSummary, Topic, Vocabulary};
use crate::divergence::{self, UnitDistribution};
use crate::scoring::{self, KnowledgeModel, Provenance, ScoringConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SynthConfig {
    pub vocab_size: usize,
    pub n_topics: usize,
    pub seed: u64,
    /// Symmetric Dirichlet concentration of the document distributions.
    pub doc_concentration: f64,
    /// Logit-space noise applied to the ideal summary before realization.
    pub summary_noise: f64,
    pub n_system_summaries_per_topic: usize,
    pub judgment_noise_sd: f64,
    pub annotator_count: usize,
    pub annotator_bias_sd: f64,
    /// Symmetric Dirichlet concentration of the planted knowledge.
    pub knowledge_concentration: f64,
    pub references_per_topic: usize,
    pub documents_per_topic: usize,
    pub tokens_per_document: usize,
    /// Tokens realized per summary.
    pub summary_tokens: usize,
    pub sentence_tokens: usize,
    /// Divergence (nats) of the best system target from the ideal summary.
    pub system_divergence_min: f64,
    /// Divergence gap between consecutive system targets.
    pub system_divergence_step: f64,
    /// Testing hook: force every document distribution to equal `K*`.
    pub force_doc_equals_knowledge: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            vocab_size: 30,
            n_topics: 200,
            seed: 42,
            doc_concentration: 1.0,
            summary_noise: 0.0,
            n_system_summaries_per_topic: 10,
            judgment_noise_sd: 0.0,
            annotator_count: 1,
            annotator_bias_sd: 0.0,
            knowledge_concentration: 1.0,
            references_per_topic: 1,
            documents_per_topic: 2,
            tokens_per_document: 400,
            summary_tokens: 100,
            sentence_tokens: 10,
            system_divergence_min: 0.4,
            system_divergence_step: 0.5,
            force_doc_equals_knowledge: false,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("vocab_size", self.vocab_size),
            ("n_topics", self.n_topics),
            ("n_system_summaries_per_topic", self.n_system_summaries_per_topic),
            ("annotator_count", self.annotator_count),
            ("references_per_topic", self.references_per_topic),
            ("documents_per_topic", self.documents_per_topic),
            ("tokens_per_document", self.tokens_per_document),
            ("summary_tokens", self.summary_tokens),
            ("sentence_tokens", self.sentence_tokens),
        ];
        for (name, v) in sizes {
            if v < 1 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        let noises = [
            ("summary_noise", self.summary_noise),
            ("judgment_noise_sd", self.judgment_noise_sd),
            ("annotator_bias_sd", self.annotator_bias_sd),
        ];
        for (name, v) in noises {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("doc_concentration", self.doc_concentration),
            ("knowledge_concentration", self.knowledge_concentration),
            ("system_divergence_min", self.system_divergence_min),
            ("system_divergence_step", self.system_divergence_step),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Generator output: the dataset plus the planted truth.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub dataset: Dataset,
    pub k_star: KnowledgeModel,
    pub vocab: Vocabulary,
}

/// Concentration of the random corners the system targets lean toward.
/// Sparse draws keep large divergences reachable.
const CORNER_CONCENTRATION: f64 = 0.3;
const CORNER_ATTEMPTS: usize = 200;

// Stream layout of the seeded generator; independent streams keep texts
// identical when only noise settings change.
const STREAM_KNOWLEDGE: u64 = 0;
const STREAM_BIAS: u64 = 1;
const STREAM_TOPIC_BASE: u64 = 1_000;
const STREAM_JUDGMENT_BASE: u64 = 2_000_000;

fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn dirichlet(n: usize, concentration: f64, rng: &mut ChaCha12Rng) -> UnitDistribution {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    loop {
        let draws: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        if draws.iter().sum::<f64>() > 0.0 {
            return UnitDistribution::from_weights(&draws).expect("positive gamma draws");
        }
    }
}

/// Exponential tilt of a distribution by gaussian logit noise. Zero noise
/// returns the input bit-for-bit (the normal draws are still consumed so
/// the stream stays aligned across noise settings).
fn perturb_on_simplex(p: &UnitDistribution, noise: f64, rng: &mut ChaCha12Rng) -> UnitDistribution {
    let draws: Vec<f64> = (0..p.len()).map(|_| StandardNormal.sample(rng)).collect();
    if noise == 0.0 {
        return p.clone();
    }
    let weights: Vec<f64> = p
        .probs()
        .iter()
        .zip(draws.iter())
        .map(|(&x, g)| x.max(1e-300).ln() + noise * g)
        .map(|logit| logit.exp())
        .collect();
    UnitDistribution::from_weights(&weights).expect("positive tilted weights")
}

/// Unsmoothed `KL(p || q)` for strictly positive `q`.
fn raw_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q.iter())
        .map(|(&a, &b)| if a > 0.0 { a * (a / b).ln() } else { 0.0 })
        .sum()
}

/// Systematic sampling of `count` tokens from `probs`: one uniform offset,
/// then evenly spaced quantile probes. Per-unit counts deviate from
/// `count * probs[j]` by less than one.
fn systematic_counts(probs: &[f64], count: usize, rng: &mut ChaCha12Rng) -> Vec<usize> {
    let u: f64 = rng.gen::<f64>();
    let mut counts = vec![0usize; probs.len()];
    let mut cum = 0.0;
    let mut j = 0usize;
    for t in 0..count {
        let pos = (t as f64 + u) / count as f64;
        while j + 1 < probs.len() && cum + probs[j] <= pos {
            cum += probs[j];
            j += 1;
        }
        counts[j] += 1;
    }
    counts
}

/// Realizes a token sequence from a distribution and formats it as sentence
/// text ("W3 w0 w7. W1 ...").
fn realize_text(
    probs: &[f64],
    count: usize,
    sentence_tokens: usize,
    rng: &mut ChaCha12Rng,
) -> String {
    let counts = systematic_counts(probs, count, rng);
    let mut tokens: Vec<usize> = Vec::with_capacity(count);
    for (j, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            tokens.push(j);
        }
    }
    tokens.shuffle(rng);
    let mut sentences = Vec::new();
    for chunk in tokens.chunks(sentence_tokens) {
        let mut words: Vec<String> = chunk.iter().map(|&j| format!("w{j}")).collect();
        // Capitalize the first word so the sentence splitter sees boundaries.
        words[0] = format!("W{}", &words[0][1..]);
        sentences.push(format!("{}.", words.join(" ")));
    }
    sentences.join(" ")
}

/// A system target on the divergence ladder: a point on the segment from
/// the ideal summary toward a random sparse corner, placed by bisection at
/// the requested KL divergence from the ideal.
fn system_target(
    ideal: &UnitDistribution,
    divergence: f64,
    rng: &mut ChaCha12Rng,
) -> UnitDistribution {
    let n = ideal.len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..CORNER_ATTEMPTS {
        let corner = dirichlet(n, CORNER_CONCENTRATION, rng);
        let kl = raw_kl(corner.probs(), ideal.probs());
        if best.as_ref().map_or(true, |(_, b)| kl > *b) {
            best = Some((corner.probs().to_vec(), kl));
        }
        if kl >= divergence + 0.02 {
            break;
        }
    }
    let (corner, corner_kl) = best.expect("at least one corner drawn");
    let target_kl = divergence.min(corner_kl);
    let mix = |lambda: f64| -> Vec<f64> {
        ideal
            .probs()
            .iter()
            .zip(corner.iter())
            .map(|(&s, &r)| (1.0 - lambda) * s + lambda * r)
            .collect()
    };
    // KL along the segment grows monotonically from 0 to corner_kl.
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..70 {
        let mid = 0.5 * (lo + hi);
        if raw_kl(&mix(mid), ideal.probs()) < target_kl {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    UnitDistribution::from_weights(&mix(0.5 * (lo + hi))).expect("mixture stays positive")
}

/// Generates the planted-truth corpus. Deterministic in the seed; the JSONL
/// serialization of equal-seed runs is byte-identical.
pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let n = config.vocab_size;
    let units: Vec<String> = (0..n).map(|j| format!("w{j}")).collect();
    let vocab = Vocabulary::from_units(units)?;
    let scoring_cfg = ScoringConfig::default();

    let mut k_rng = stream_rng(config.seed, STREAM_KNOWLEDGE);
    let k_star = if n == 1 {
        UnitDistribution::uniform(1)
    } else {
        dirichlet(n, config.knowledge_concentration, &mut k_rng)
    };

    let mut bias_rng = stream_rng(config.seed, STREAM_BIAS);
    let biases: Vec<f64> = (0..config.annotator_count)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut bias_rng);
            g * config.annotator_bias_sd
        })
        .collect();

    let mut topics = Vec::with_capacity(config.n_topics);
    for t in 0..config.n_topics {
        let mut rng = stream_rng(config.seed, STREAM_TOPIC_BASE + t as u64);
        let mut judgment_rng = stream_rng(config.seed, STREAM_JUDGMENT_BASE + t as u64);
        let annotator = format!("a{}", t % config.annotator_count);
        let bias = biases[t % config.annotator_count];

        let generator_dist = if config.force_doc_equals_knowledge {
            k_star.clone()
        } else {
            dirichlet(n, config.doc_concentration, &mut rng)
        };
        let documents: Vec<String> = (0..config.documents_per_topic)
            .map(|_| {
                realize_text(
                    generator_dist.probs(),
                    config.tokens_per_document,
                    config.sentence_tokens,
                    &mut rng,
                )
            })
            .collect();
        // Everything downstream is defined against the realized text, the
        // same distribution any scorer will estimate from the dataset. The
        // testing hook keeps the forced distribution exact instead.
        let document_dist = if config.force_doc_equals_knowledge {
            generator_dist
        } else {
            crate::corpus::text_to_distribution(
                &documents.join(" "),
                &vocab,
                &crate::corpus::TokenizerConfig::default(),
            )
        };

        let ideal =
            divergence::optimal_summary_distribution(&document_dist, &k_star, &scoring_cfg)?;

        let mut reference_summaries = Vec::with_capacity(config.references_per_topic);
        for _ in 0..config.references_per_topic {
            let target = perturb_on_simplex(&ideal, config.summary_noise, &mut rng);
            reference_summaries.push(realize_text(
                target.probs(),
                config.summary_tokens,
                config.sentence_tokens,
                &mut rng,
            ));
        }

        let mut judged_summaries = Vec::with_capacity(config.n_system_summaries_per_topic);
        for q in 0..config.n_system_summaries_per_topic {
            let divergence_level =
                config.system_divergence_min + q as f64 * config.system_divergence_step;
            let target = if n == 1 {
                ideal.clone()
            } else {
                system_target(&ideal, divergence_level, &mut rng)
            };
            let text = realize_text(
                target.probs(),
                config.summary_tokens,
                config.sentence_tokens,
                &mut rng,
            );
            let clean = scoring::theta_with_k(&target, &document_dist, &k_star, &scoring_cfg)?;
            let noise: f64 = StandardNormal.sample(&mut judgment_rng);
            judged_summaries.push(JudgedSummary {
                text,
                score: clean + noise * config.judgment_noise_sd + bias,
                annotator: Some(annotator.clone()),
            });
        }

        let mut tags = std::collections::BTreeMap::new();
        tags.insert("annotator".to_string(), annotator);
        topics.push(Topic {
            id: format!("topic-{t:04}"),
            documents,
            reference_summaries,
            judged_summaries,
            tags,
        });
    }

    let provenance = {
        let mut p = Provenance::new("planted");
        p.seed = config.seed;
        p.data_slice = format!("synthetic ({} topics)", config.n_topics);
        p = p
            .with_param("vocab_size", config.vocab_size as u64)
            .with_param("doc_concentration", config.doc_concentration)
            .with_param("knowledge_concentration", config.knowledge_concentration);
        p
    };
    let k_star_model = KnowledgeModel::new(vocab.clone(), k_star, provenance)?;
    let dataset = Dataset::new("synthetic", topics)?;
    Ok(SynthOutput {
        dataset,
        k_star: k_star_model,
        vocab,
    })
}

/// A noisy copy of a knowledge model: gaussian noise on the log
/// probabilities, renormalized through softmax. Zero noise returns the
/// model's distribution exactly.
pub fn perturbed_knowledge(k_star: &KnowledgeModel, noise: f64, seed: u64) -> Result<KnowledgeModel> {
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "noise must be finite and nonnegative, got {noise}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let k = perturb_on_simplex(&k_star.k, noise, &mut rng);
    let mut provenance = Provenance::new("perturbed").with_param("noise", noise);
    provenance.seed = seed;
    KnowledgeModel::new(k_star.vocab.clone(), k, provenance)
}
