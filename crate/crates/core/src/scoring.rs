//! The summary scoring function `theta_K` and the distribution-based
//! baseline scorers.
//!
//! Every scorer follows the same contract: higher is better. The pure
//! divergence baselines are therefore negated.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{self, TokenizerConfig, Topic, Vocabulary};
use crate::divergence::{self, SmoothingConfig, UnitDistribution};
use crate::{Error, Result};

/// Weights and smoothing for `theta_K`. Defaults to `alpha = beta = 1`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScoringConfig {
    pub alpha: f64,
    pub beta: f64,
    pub smoothing: SmoothingConfig,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            smoothing: SmoothingConfig::default(),
        }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        SmoothingConfig::new(self.smoothing.epsilon).map(|_| ())
    }
}

/// Where a fitted knowledge distribution came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub algorithm: String,
    #[serde(default)]
    pub hyperparams: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub data_slice: String,
    #[serde(default)]
    pub seed: u64,
    /// Per-epoch training loss for gradient-trained models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_trace: Option<Vec<f64>>,
}

impl Provenance {
    pub fn new(algorithm: impl Into<String>) -> Self {
        Self {
            algorithm: algorithm.into(),
            hyperparams: BTreeMap::new(),
            data_slice: String::new(),
            seed: 0,
            loss_trace: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.hyperparams.insert(key.to_string(), value.into());
        self
    }
}

/// A fitted background-knowledge distribution over a vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeModel {
    pub vocab: Vocabulary,
    pub k: UnitDistribution,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    units: Vec<String>,
    probs: Vec<f64>,
    provenance: Provenance,
}

/// Tolerance for the sum of probabilities when loading a model file.
const LOAD_SUM_TOLERANCE: f64 = 1e-6;

impl KnowledgeModel {
    pub fn new(vocab: Vocabulary, k: UnitDistribution, provenance: Provenance) -> Result<Self> {
        if vocab.len() != k.len() {
            return Err(Error::LengthMismatch {
                left: vocab.len(),
                right: k.len(),
            });
        }
        Ok(Self { vocab, k, provenance })
    }

    /// Serializes to the model JSON schema:
    /// `{"units": [...], "probs": [...], "provenance": {...}}`.
    pub fn to_json(&self) -> Result<String> {
        let record = ModelRecord {
            units: self.vocab.units().to_vec(),
            probs: self.k.probs().to_vec(),
            provenance: self.provenance.clone(),
        };
        Ok(serde_json::to_string_pretty(&record)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_json()?.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let record: ModelRecord = serde_json::from_str(&text)?;
        if record.units.len() != record.probs.len() {
            return Err(Error::LengthMismatch {
                left: record.units.len(),
                right: record.probs.len(),
            });
        }
        let sum: f64 = record.probs.iter().sum();
        if (sum - 1.0).abs() > LOAD_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "model probabilities sum to {sum}"
            )));
        }
        // Exactly renormalize so downstream invariants hold bit-for-bit.
        let k = UnitDistribution::from_weights(&record.probs)?;
        let vocab = Vocabulary::from_units(record.units)?;
        KnowledgeModel::new(vocab, k, record.provenance)
    }

    /// Reorders this model's probabilities to another vocabulary with the
    /// same unit set.
    pub fn realign(&self, vocab: &Vocabulary) -> Result<UnitDistribution> {
        if vocab.len() != self.vocab.len() {
            return Err(Error::VocabularyMismatch(format!(
                "sizes differ: {} vs {}",
                vocab.len(),
                self.vocab.len()
            )));
        }
        let mut probs = vec![0.0; vocab.len()];
        for (unit, &p) in self.vocab.units().iter().zip(self.k.probs()) {
            match vocab.get(unit) {
                Some(i) => probs[i] = p,
                None => {
                    return Err(Error::VocabularyMismatch(format!(
                        "unit `{unit}` missing from target vocabulary"
                    )))
                }
            }
        }
        UnitDistribution::new(probs)
    }
}

/// The uniform background knowledge over `vocab`.
pub fn uniform_model(vocab: &Vocabulary) -> KnowledgeModel {
    KnowledgeModel {
        vocab: vocab.clone(),
        k: UnitDistribution::uniform(vocab.len()),
        provenance: Provenance::new("uniform"),
    }
}

/// Background knowledge proportional to document frequency over a background
/// corpus (one document per entry), with add-one smoothing so every unit has
/// positive mass.
pub fn df_model(
    vocab: &Vocabulary,
    background_docs: &[String],
    tokenizer: &TokenizerConfig,
) -> Result<KnowledgeModel> {
    if background_docs.is_empty() {
        return Err(Error::DegenerateInput("background corpus is empty".into()));
    }
    let df = document_frequencies(vocab, background_docs, tokenizer);
    let weights: Vec<f64> = df.iter().map(|&c| c as f64 + 1.0).collect();
    let k = UnitDistribution::from_weights(&weights)?;
    let provenance = Provenance::new("df")
        .with_param("background_docs", background_docs.len() as u64);
    KnowledgeModel::new(vocab.clone(), k, provenance)
}

/// Per-unit document frequencies over a background corpus.
pub fn document_frequencies(
    vocab: &Vocabulary,
    background_docs: &[String],
    tokenizer: &TokenizerConfig,
) -> Vec<u64> {
    let mut df = vec![0u64; vocab.len()];
    for doc in background_docs {
        let mut seen = vec![false; vocab.len()];
        for tok in corpus::tokenize(doc, tokenizer) {
            if let Some(i) = vocab.get(&tok) {
                if !seen[i] {
                    seen[i] = true;
                    df[i] += 1;
                }
            }
        }
    }
    df
}

/// `theta_K` on raw distributions:
/// `H(s) - alpha * KL(s||d) + beta * KL(s||k)`.
pub fn theta_with_k(
    s: &UnitDistribution,
    d: &UnitDistribution,
    k: &UnitDistribution,
    config: &ScoringConfig,
) -> Result<f64> {
    let h = divergence::entropy(s);
    let rel = divergence::kl(s, d, &config.smoothing)?;
    let inf = divergence::kl(s, k, &config.smoothing)?;
    Ok(h - config.alpha * rel + config.beta * inf)
}

/// `theta_K` against a fitted knowledge model.
pub fn theta(
    s: &UnitDistribution,
    d: &UnitDistribution,
    model: &KnowledgeModel,
    config: &ScoringConfig,
) -> Result<f64> {
    theta_with_k(s, d, &model.k, config)
}

/// The distribution-only baseline scorers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// Negated `KL(S||D)`.
    KlSd,
    /// Negated `JS(S||D)`.
    JsSd,
    /// `theta` with uniform background knowledge.
    ThetaUniform,
    /// `theta` with document-frequency background knowledge.
    ThetaIdf,
}

/// Scores a summary against a document with the chosen baseline. Divergence
/// baselines are negated so that higher is always better.
pub fn baseline_score(
    s: &UnitDistribution,
    d: &UnitDistribution,
    kind: BaselineKind,
    idf_model: Option<&KnowledgeModel>,
    config: &ScoringConfig,
) -> Result<f64> {
    match kind {
        BaselineKind::KlSd => Ok(-divergence::kl(s, d, &config.smoothing)?),
        BaselineKind::JsSd => Ok(-divergence::js(s, d)?),
        BaselineKind::ThetaUniform => {
            let k = UnitDistribution::uniform(s.len());
            theta_with_k(s, d, &k, config)
        }
        BaselineKind::ThetaIdf => {
            let model = idf_model.ok_or_else(|| {
                Error::InvalidConfig("theta_idf baseline requires an idf model".into())
            })?;
            theta(s, d, model, config)
        }
    }
}

/// A summary scoring function handle: either `theta` with a fitted model or
/// one of the baselines.
#[derive(Debug, Clone)]
pub enum Scorer {
    Theta(KnowledgeModel),
    Baseline {
        kind: BaselineKind,
        idf_model: Option<KnowledgeModel>,
    },
}

impl Scorer {
    pub fn score(
        &self,
        s: &UnitDistribution,
        d: &UnitDistribution,
        config: &ScoringConfig,
    ) -> Result<f64> {
        match self {
            Scorer::Theta(model) => theta(s, d, model, config),
            Scorer::Baseline { kind, idf_model } => {
                baseline_score(s, d, *kind, idf_model.as_ref(), config)
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Scorer::Theta(model) => format!("theta:{}", model.provenance.algorithm),
            Scorer::Baseline { kind, .. } => match kind {
                BaselineKind::KlSd => "kl_sd".into(),
                BaselineKind::JsSd => "js_sd".into(),
                BaselineKind::ThetaUniform => "theta_uniform".into(),
                BaselineKind::ThetaIdf => "theta_idf".into(),
            },
        }
    }
}

/// The texts a topic offers for ranking: judged summaries first (in input
/// order), then reference summaries. Ranked indices refer to this pool.
pub fn summary_pool(topic: &Topic) -> Vec<&str> {
    topic
        .judged_summaries
        .iter()
        .map(|j| j.text.as_str())
        .chain(topic.reference_summaries.iter().map(|s| s.as_str()))
        .collect()
}

/// Scores every summary in a topic's pool and returns `(pool index, score)`
/// pairs in descending score order. Ties keep input order.
pub fn rank_summaries(
    topic: &Topic,
    scorer: &Scorer,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    config: &ScoringConfig,
) -> Result<Vec<(usize, f64)>> {
    let pool = summary_pool(topic);
    if pool.is_empty() {
        return Err(Error::DegenerateInput(format!(
            "topic `{}` has no summaries to rank",
            topic.id
        )));
    }
    let d = corpus::topic_document_distribution(topic, vocab, tokenizer);
    let mut scored = Vec::with_capacity(pool.len());
    for (i, text) in pool.iter().enumerate() {
        let s = corpus::text_to_distribution(text, vocab, tokenizer);
        scored.push((i, scorer.score(&s, &d, config)?));
    }
    // Stable sort keeps input order on ties.
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    Ok(scored)
}
