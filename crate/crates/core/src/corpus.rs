//! Dataset ingestion, tokenization, vocabularies, and text-to-distribution
//! conversion.
//!
//! Datasets are JSONL files with one topic per line:
//!
//! ```json
//! {"id": "t1", "documents": ["..."], "reference_summaries": ["..."],
//!  "judged_summaries": [{"text": "...", "score": 1.5, "annotator": "a0"}],
//!  "tags": {"domain": "news"}}
//! ```
//!
//! `judged_summaries` and `tags` are optional. Tokenization lowercases and
//! splits on runs of non-alphanumeric characters; an optional stopword list
//! and a minimum-count filter apply when building vocabularies.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::divergence::UnitDistribution;
use crate::{Error, Result};

/// Tokenization and vocabulary-filter settings.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TokenizerConfig {
    /// Tokens dropped everywhere (empty set disables stopword removal).
    #[serde(default)]
    pub stopwords: BTreeSet<String>,
    /// Minimum total count for a token to enter the vocabulary.
    #[serde(default)]
    pub min_count: usize,
}

impl TokenizerConfig {
    /// A config with the built-in English stopword list enabled.
    pub fn with_standard_stopwords() -> Self {
        Self {
            stopwords: standard_stopwords(),
            min_count: 0,
        }
    }
}

/// A compact English stopword list for experiments that remove stopwords.
pub fn standard_stopwords() -> BTreeSet<String> {
    const WORDS: &[&str] = &[
        "a", "about", "after", "again", "against", "all", "also", "am", "an", "and", "any", "are",
        "as", "at", "be", "been", "being", "both", "but", "by", "can", "did", "do", "does", "down",
        "each", "few", "for", "from", "further", "had", "has", "have", "having", "he", "her",
        "here", "his", "how", "i", "if", "in", "into", "is", "it", "its", "just", "more", "most",
        "no", "nor", "not", "of", "on", "once", "only", "or", "other", "our", "out", "over",
        "own", "s", "said", "same", "she", "so", "some", "such", "t", "than", "that", "the",
        "their", "them", "then", "there", "these", "they", "this", "those", "to", "too", "under",
        "up", "very", "was", "we", "were", "what", "when", "where", "which", "who", "whom", "why",
        "will", "with", "you", "your",
    ];
    WORDS.iter().map(|w| w.to_string()).collect()
}

/// Lowercases and splits `text` on non-alphanumeric runs, dropping stopwords.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .filter(|t| !config.stopwords.contains(t))
        .collect()
}

/// A bijection between unit strings and dense indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    units: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from an ordered unit list. Units must be unique
    /// and nonempty.
    pub fn from_units(units: Vec<String>) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let mut index = HashMap::with_capacity(units.len());
        for (i, u) in units.iter().enumerate() {
            if index.insert(u.clone(), i).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate unit `{u}`")));
            }
        }
        Ok(Self { units, index })
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn get(&self, unit: &str) -> Option<usize> {
        self.index.get(unit).copied()
    }
}

/// One summary with a human judgment score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgedSummary {
    pub text: String,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotator: Option<String>,
}

/// One source document set with its reference summaries and optional judged
/// summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub id: String,
    pub documents: Vec<String>,
    pub reference_summaries: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub judged_summaries: Vec<JudgedSummary>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tags: BTreeMap<String, String>,
}

impl Topic {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.documents.is_empty() {
            return Err(format!("topic `{}` has no documents", self.id));
        }
        for (i, j) in self.judged_summaries.iter().enumerate() {
            if !j.score.is_finite() {
                return Err(format!(
                    "topic `{}` judged summary {} has non-finite score",
                    self.id, i
                ));
            }
            if let Some(a) = &j.annotator {
                if a.is_empty() {
                    return Err(format!(
                        "topic `{}` judged summary {} has empty annotator",
                        self.id, i
                    ));
                }
            }
        }
        Ok(())
    }
}

/// An ordered collection of topics.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub topics: Vec<Topic>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, topics: Vec<Topic>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for t in &topics {
            if !seen.insert(t.id.clone()) {
                return Err(Error::DuplicateTopicId(t.id.clone()));
            }
        }
        Ok(Self {
            name: name.into(),
            topics,
        })
    }
}

/// Loads a JSONL dataset, one topic per line. Empty files yield an empty
/// dataset; blank lines are rejected as schema violations.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let mut topics = Vec::new();
    let mut ids = BTreeSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let topic: Topic = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        topic.validate().map_err(|msg| Error::Parse { line: lineno, msg })?;
        if !ids.insert(topic.id.clone()) {
            return Err(Error::DuplicateTopicId(topic.id));
        }
        topics.push(topic);
    }
    Ok(Dataset { name, topics })
}

/// Writes a dataset as JSONL, one topic per line.
pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for topic in &dataset.topics {
        serde_json::to_writer(&mut out, topic)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Builds the vocabulary of every token occurring in any document or summary
/// of `dataset`, ordered by descending total count with lexicographic
/// tie-breaking.
pub fn build_vocabulary(dataset: &Dataset, config: &TokenizerConfig) -> Result<Vocabulary> {
    if dataset.topics.is_empty() {
        return Err(Error::DegenerateInput(
            "cannot build a vocabulary from an empty dataset".into(),
        ));
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    let add_text = |text: &str, counts: &mut HashMap<String, u64>| {
        for tok in tokenize(text, config) {
            *counts.entry(tok).or_insert(0) += 1;
        }
    };
    for topic in &dataset.topics {
        for doc in &topic.documents {
            add_text(doc, &mut counts);
        }
        for s in &topic.reference_summaries {
            add_text(s, &mut counts);
        }
        for j in &topic.judged_summaries {
            add_text(&j.text, &mut counts);
        }
    }
    let mut entries: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|(_, c)| *c as usize >= config.min_count.max(1))
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if entries.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Vocabulary::from_units(entries.into_iter().map(|(u, _)| u).collect())
}

/// Converts a text into its unit distribution over `vocab`.
///
/// Out-of-vocabulary tokens are dropped. A text with no in-vocabulary tokens
/// maps to the uniform fallback with `has_support() == false`.
pub fn text_to_distribution(
    text: &str,
    vocab: &Vocabulary,
    config: &TokenizerConfig,
) -> UnitDistribution {
    let mut counts = vec![0.0f64; vocab.len()];
    let mut total = 0.0f64;
    for tok in tokenize(text, config) {
        if let Some(i) = vocab.get(&tok) {
            counts[i] += 1.0;
            total += 1.0;
        }
    }
    if total == 0.0 {
        return UnitDistribution::empty_support_fallback(vocab.len());
    }
    for c in &mut counts {
        *c /= total;
    }
    UnitDistribution::new(counts).expect("normalized counts form a distribution")
}

/// The distribution of a topic's documents, concatenated into one text.
pub fn topic_document_distribution(
    topic: &Topic,
    vocab: &Vocabulary,
    config: &TokenizerConfig,
) -> UnitDistribution {
    let joined = topic.documents.join(" ");
    text_to_distribution(&joined, vocab, config)
}
