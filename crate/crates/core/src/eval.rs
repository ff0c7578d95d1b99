//! Agreement metrics and the cross-validation harness.
//!
//! Scoring functions are compared by how well they reproduce human
//! judgments: Kendall's tau-b between scorer and human scores per topic, and
//! the mean rank of reference summaries among all ranked summaries (lower is
//! better, 1 means references come first).

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::closed_form::{self, ClosedFormConfig, Prior};
use crate::corpus::{self, Dataset, TokenizerConfig, Topic, Vocabulary};
use crate::scoring::{KnowledgeModel, Scorer, ScoringConfig};
use crate::train::{self, TrainConfig};
use crate::{Error, Result};

/// Kendall's tau-b (tie-corrected) between two equally long score lists.
pub fn kendall_tau(scores_a: &[f64], scores_b: &[f64]) -> Result<f64> {
    if scores_a.len() != scores_b.len() {
        return Err(Error::LengthMismatch {
            left: scores_a.len(),
            right: scores_b.len(),
        });
    }
    let n = scores_a.len();
    if n < 2 {
        return Err(Error::DegenerateInput(
            "kendall_tau needs at least two items".into(),
        ));
    }
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    let mut ties_a = 0u64;
    let mut ties_b = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            let da = scores_a[i] - scores_a[j];
            let db = scores_b[i] - scores_b[j];
            if da == 0.0 {
                ties_a += 1;
            }
            if db == 0.0 {
                ties_b += 1;
            }
            let prod = da * db;
            if prod > 0.0 {
                concordant += 1;
            } else if prod < 0.0 {
                discordant += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as f64;
    let denom = (n0 - ties_a as f64) * (n0 - ties_b as f64);
    if denom <= 0.0 {
        return Err(Error::DegenerateInput(
            "kendall_tau is undefined when one side is constant".into(),
        ));
    }
    let tau = (concordant as f64 - discordant as f64) / denom.sqrt();
    Ok(tau.clamp(-1.0, 1.0))
}

/// Ranks of `scores` (1 = best for descending order), ties averaged.
pub fn average_ranks(scores: &[f64]) -> Vec<f64> {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Positions i..=j share the averaged rank.
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Mean rank of a topic's reference summaries when references and judged
/// (system) summaries are ranked together by the scorer, descending, with
/// ties given their average rank.
pub fn mean_reference_rank(
    topic: &Topic,
    scorer: &Scorer,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    config: &ScoringConfig,
) -> Result<f64> {
    if topic.reference_summaries.is_empty() {
        return Err(Error::DegenerateInput(format!(
            "topic `{}` has no reference summaries to rank",
            topic.id
        )));
    }
    if topic.judged_summaries.is_empty() {
        return Err(Error::DegenerateInput(format!(
            "topic `{}` has no system summaries to rank against",
            topic.id
        )));
    }
    let d = corpus::topic_document_distribution(topic, vocab, tokenizer);
    let n_judged = topic.judged_summaries.len();
    let mut scores = Vec::with_capacity(n_judged + topic.reference_summaries.len());
    for text in crate::scoring::summary_pool(topic) {
        let s = corpus::text_to_distribution(text, vocab, tokenizer);
        scores.push(scorer.score(&s, &d, config)?);
    }
    let ranks = average_ranks(&scores);
    let reference_ranks = &ranks[n_judged..];
    Ok(reference_ranks.iter().sum::<f64>() / reference_ranks.len() as f64)
}

/// ROUGE-2 recall: clipped candidate bigram matches over total reference
/// bigrams, averaged over references. Stopwords (from the tokenizer config)
/// are removed before bigram extraction.
pub fn rouge2_recall(
    candidate: &str,
    references: &[String],
    tokenizer: &TokenizerConfig,
) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::DegenerateInput("no references".into()));
    }
    let bigrams = |text: &str| -> Vec<(String, String)> {
        let toks = corpus::tokenize(text, tokenizer);
        toks.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
    };
    let mut cand_counts: HashMap<(String, String), u64> = HashMap::new();
    for bg in bigrams(candidate) {
        *cand_counts.entry(bg).or_insert(0) += 1;
    }
    let mut total = 0.0;
    for reference in references {
        let ref_bigrams = bigrams(reference);
        if ref_bigrams.is_empty() {
            return Err(Error::DegenerateInput(
                "reference has fewer than two tokens after filtering".into(),
            ));
        }
        let mut ref_counts: HashMap<(String, String), u64> = HashMap::new();
        for bg in ref_bigrams.iter().cloned() {
            *ref_counts.entry(bg).or_insert(0) += 1;
        }
        let matched: u64 = ref_counts
            .iter()
            .map(|(bg, &rc)| rc.min(*cand_counts.get(bg).unwrap_or(&0)))
            .sum();
        total += matched as f64 / ref_bigrams.len() as f64;
    }
    Ok(total / references.len() as f64)
}

/// The inference algorithms the harness can train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    MsU,
    MsD,
    Pm,
    HReg,
    HPl,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::MsU => "ms-u",
            Algorithm::MsD => "ms-d",
            Algorithm::Pm => "pm",
            Algorithm::HReg => "hreg",
            Algorithm::HPl => "hpl",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ms-u" => Ok(Algorithm::MsU),
            "ms-d" => Ok(Algorithm::MsD),
            "pm" => Ok(Algorithm::Pm),
            "hreg" => Ok(Algorithm::HReg),
            "hpl" => Ok(Algorithm::HPl),
            other => Err(Error::InvalidConfig(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Configuration bundle for the harness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvConfigs {
    pub tokenizer: TokenizerConfig,
    pub scoring: ScoringConfig,
    pub closed_form: ClosedFormConfig,
    pub train: TrainConfig,
}

impl Default for CvConfigs {
    fn default() -> Self {
        Self {
            tokenizer: TokenizerConfig::default(),
            scoring: ScoringConfig::default(),
            closed_form: ClosedFormConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

/// Trains one algorithm on a dataset over a fixed vocabulary.
pub fn train_algorithm(
    algorithm: Algorithm,
    dataset: &Dataset,
    vocab: &Vocabulary,
    configs: &CvConfigs,
) -> Result<KnowledgeModel> {
    match algorithm {
        Algorithm::MsU => {
            let cfg = ClosedFormConfig {
                prior: Prior::Uniform,
                ..configs.closed_form
            };
            closed_form::infer_ms_u(dataset, vocab, &configs.tokenizer, &cfg)
        }
        Algorithm::MsD => {
            let cfg = ClosedFormConfig {
                prior: Prior::Document,
                ..configs.closed_form
            };
            closed_form::infer_ms_d(dataset, vocab, &configs.tokenizer, &cfg)
        }
        Algorithm::Pm => train::infer_pm(
            dataset,
            vocab,
            &configs.tokenizer,
            &configs.train,
            &configs.scoring,
        ),
        Algorithm::HReg => train::infer_hreg(
            dataset,
            vocab,
            &configs.tokenizer,
            &configs.train,
            &configs.scoring,
        ),
        Algorithm::HPl => train::infer_hpl(
            dataset,
            vocab,
            &configs.tokenizer,
            &configs.train,
            &configs.scoring,
        ),
    }
}

/// Per-topic agreement numbers. `None` marks metrics that are undefined for
/// the topic (too few judged summaries, constant scores, missing
/// references).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicEval {
    pub topic_id: String,
    pub kendall_tau: Option<f64>,
    pub reference_mean_rank: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalAggregate {
    /// Macro-average of per-topic tau over topics where it is defined.
    pub mean_tau: Option<f64>,
    pub mean_reference_rank: Option<f64>,
    /// Topics evaluated in total.
    pub n_topics: usize,
    /// Topics contributing to `mean_tau` / `mean_reference_rank`.
    pub tau_topics: usize,
    pub rank_topics: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub scorer: String,
    pub folds: Option<usize>,
    pub seed: u64,
    pub per_topic: Vec<TopicEval>,
    pub aggregate: EvalAggregate,
    /// Echo of the configuration the run used.
    pub config: serde_json::Value,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_json()?.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }

    /// Per-topic CSV: `topic_id,kendall_tau,reference_mean_rank`.
    pub fn per_topic_csv(&self) -> String {
        let mut out = String::from("topic_id,kendall_tau,reference_mean_rank\n");
        for row in &self.per_topic {
            let tau = row.kendall_tau.map(|v| v.to_string()).unwrap_or_default();
            let mr = row
                .reference_mean_rank
                .map(|v| v.to_string())
                .unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", csv_field(&row.topic_id), tau, mr));
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn eval_topic(
    topic: &Topic,
    scorer: &Scorer,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    scoring: &ScoringConfig,
) -> Result<TopicEval> {
    let tau = if topic.judged_summaries.len() >= 2 {
        let d = corpus::topic_document_distribution(topic, vocab, tokenizer);
        let mut human = Vec::with_capacity(topic.judged_summaries.len());
        let mut predicted = Vec::with_capacity(topic.judged_summaries.len());
        for judged in &topic.judged_summaries {
            let s = corpus::text_to_distribution(&judged.text, vocab, tokenizer);
            human.push(judged.score);
            predicted.push(scorer.score(&s, &d, scoring)?);
        }
        kendall_tau(&human, &predicted).ok()
    } else {
        None
    };
    let mr = if !topic.reference_summaries.is_empty() && !topic.judged_summaries.is_empty() {
        Some(mean_reference_rank(topic, scorer, vocab, tokenizer, scoring)?)
    } else {
        None
    };
    Ok(TopicEval {
        topic_id: topic.id.clone(),
        kendall_tau: tau,
        reference_mean_rank: mr,
    })
}

fn aggregate(per_topic: &[TopicEval]) -> EvalAggregate {
    let taus: Vec<f64> = per_topic.iter().filter_map(|t| t.kendall_tau).collect();
    let ranks: Vec<f64> = per_topic
        .iter()
        .filter_map(|t| t.reference_mean_rank)
        .collect();
    EvalAggregate {
        mean_tau: mean(&taus),
        mean_reference_rank: mean(&ranks),
        n_topics: per_topic.len(),
        tau_topics: taus.len(),
        rank_topics: ranks.len(),
    }
}

/// Evaluates a fixed scorer on every topic of the dataset (no training).
pub fn evaluate_with_scorer(
    dataset: &Dataset,
    scorer: &Scorer,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    scoring: &ScoringConfig,
) -> Result<EvalReport> {
    let mut per_topic = Vec::with_capacity(dataset.topics.len());
    for topic in &dataset.topics {
        per_topic.push(eval_topic(topic, scorer, vocab, tokenizer, scoring)?);
    }
    let aggregate = aggregate(&per_topic);
    Ok(EvalReport {
        scorer: scorer.name(),
        folds: None,
        seed: 0,
        per_topic,
        aggregate,
        config: serde_json::json!({ "scoring": scoring }),
    })
}

/// Seeded fold assignment: a shuffle followed by contiguous blocks of as
/// even a size as possible. Returns `folds` index lists.
pub fn fold_assignment(n_topics: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    use rand::prelude::*;
    let mut order: Vec<usize> = (0..n_topics).collect();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = n_topics / folds;
    let remainder = n_topics % folds;
    let mut blocks = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let size = base + usize::from(f < remainder);
        blocks.push(order[start..start + size].to_vec());
        start += size;
    }
    blocks
}

/// K-fold cross-validation: trains the algorithm on all but one fold and
/// evaluates per-topic tau and mean reference rank on the held-out fold.
/// The vocabulary is built once from the full dataset.
pub fn cross_validate(
    dataset: &Dataset,
    algorithm: Algorithm,
    folds: usize,
    configs: &CvConfigs,
    seed: u64,
) -> Result<EvalReport> {
    if folds < 2 {
        return Err(Error::InvalidConfig(
            "cross-validation needs at least 2 folds".into(),
        ));
    }
    if dataset.topics.len() < folds {
        return Err(Error::TooFewTopics {
            have: dataset.topics.len(),
            need: folds,
        });
    }
    let vocab = corpus::build_vocabulary(dataset, &configs.tokenizer)?;
    let assignment = fold_assignment(dataset.topics.len(), folds, seed);
    let mut rows: Vec<Option<TopicEval>> = vec![None; dataset.topics.len()];
    for (f, held_out) in assignment.iter().enumerate() {
        let held: std::collections::BTreeSet<usize> = held_out.iter().copied().collect();
        let training: Vec<Topic> = dataset
            .topics
            .iter()
            .enumerate()
            .filter(|(i, _)| !held.contains(i))
            .map(|(_, t)| t.clone())
            .collect();
        let train_ds = Dataset {
            name: format!("{}-fold{}", dataset.name, f),
            topics: training,
        };
        let model = train_algorithm(algorithm, &train_ds, &vocab, configs)?;
        let scorer = Scorer::Theta(model);
        for &t in held_out {
            let row = eval_topic(
                &dataset.topics[t],
                &scorer,
                &vocab,
                &configs.tokenizer,
                &configs.scoring,
            )?;
            rows[t] = Some(row);
        }
    }
    let per_topic: Vec<TopicEval> = rows
        .into_iter()
        .map(|r| r.expect("every topic lands in exactly one fold"))
        .collect();
    let aggregate = aggregate(&per_topic);
    Ok(EvalReport {
        scorer: format!("theta:{}", algorithm.name()),
        folds: Some(folds),
        seed,
        per_topic,
        aggregate,
        config: serde_json::to_value(configs)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::JudgedSummary;
    use crate::scoring::{uniform_model, Provenance};
    use approx::assert_abs_diff_eq;

    #[test]
    fn kendall_tau_hand_values() {
        assert_abs_diff_eq!(
            kendall_tau(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn kendall_tau_degenerate_inputs() {
        assert!(kendall_tau(&[1.0], &[1.0]).is_err());
        assert!(kendall_tau(&[1.0, 2.0], &[1.0]).is_err());
        assert!(kendall_tau(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(kendall_tau(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).is_err());
    }

    #[test]
    fn kendall_tau_antisymmetry_and_monotone_invariance() {
        let a = [0.3, 1.2, -0.5, 2.0, 0.7];
        let b = [10.0, 3.0, 8.0, 1.0, 2.0];
        let tau = kendall_tau(&a, &b).unwrap();
        let reversed: Vec<f64> = b.iter().map(|x| -x).collect();
        assert_abs_diff_eq!(kendall_tau(&a, &reversed).unwrap(), -tau, epsilon = 1e-12);
        let transformed: Vec<f64> = b.iter().map(|x| x.exp() + 7.0).collect();
        assert_abs_diff_eq!(kendall_tau(&a, &transformed).unwrap(), tau, epsilon = 1e-12);
    }

    #[test]
    fn average_ranks_handles_ties() {
        let ranks = average_ranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(ranks, vec![1.5, 4.0, 1.5, 3.0]);
    }

    fn mk_topic(id: &str, refs: &[&str], judged: &[(&str, f64)]) -> Topic {
        Topic {
            id: id.into(),
            documents: vec!["Alpha beta gamma delta. Beta gamma delta alpha.".into()],
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

    #[test]
    fn mean_reference_rank_hand_cases() {
        let vocab = Vocabulary::from_units(vec![
            "alpha".into(),
            "beta".into(),
            "gamma".into(),
            "delta".into(),
        ])
        .unwrap();
        let tok = TokenizerConfig::default();
        let cfg = ScoringConfig::default();
        // Knowledge mass on alpha makes non-alpha summaries score higher.
        let k = crate::divergence::UnitDistribution::new(vec![0.85, 0.05, 0.05, 0.05]).unwrap();
        let model =
            KnowledgeModel::new(vocab.clone(), k, Provenance::new("test")).unwrap();
        let scorer = Scorer::Theta(model);

        // Reference clearly best: rank 1.
        let topic = mk_topic(
            "t",
            &["beta gamma delta"],
            &[
                ("alpha alpha alpha", 0.0),
                ("alpha alpha beta", 0.0),
                ("alpha beta alpha", 0.0),
            ],
        );
        let mr = mean_reference_rank(&topic, &scorer, &vocab, &tok, &cfg).unwrap();
        assert_abs_diff_eq!(mr, 1.0, epsilon = 1e-12);

        // Reference tied with the single system summary: (1 + 2) / 2.
        let topic = mk_topic("t", &["beta gamma"], &[("beta gamma", 0.0)]);
        let mr = mean_reference_rank(&topic, &scorer, &vocab, &tok, &cfg).unwrap();
        assert_abs_diff_eq!(mr, 1.5, epsilon = 1e-12);

        let no_refs = mk_topic("t", &[], &[("beta", 0.0)]);
        assert!(mean_reference_rank(&no_refs, &scorer, &vocab, &tok, &cfg).is_err());
        let no_sys = mk_topic("t", &["beta"], &[]);
        assert!(mean_reference_rank(&no_sys, &scorer, &vocab, &tok, &cfg).is_err());
    }

    #[test]
    fn rouge2_hand_values() {
        let tok = TokenizerConfig::default();
        assert_abs_diff_eq!(
            rouge2_recall("a b c", &["a b c".into()], &tok).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            rouge2_recall("x y z", &["a b c".into()], &tok).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        // Reference bigrams {ab, bd, dc, cb}; candidate matches only ab.
        assert_abs_diff_eq!(
            rouge2_recall("a b c", &["a b d c b".into()], &tok).unwrap(),
            0.25,
            epsilon = 1e-12
        );
        assert!(rouge2_recall("a b", &["single".into()], &tok).is_err());
        assert!(rouge2_recall("a b", &[], &tok).is_err());
    }

    #[test]
    fn rouge2_removes_stopwords_before_bigrams() {
        let tok = TokenizerConfig::with_standard_stopwords();
        // "the" disappears, making the candidate match the reference exactly.
        let r = rouge2_recall("big the cat", &["big cat".into()], &tok).unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fold_assignment_partitions_and_reproduces() {
        let a = fold_assignment(10, 4, 7);
        let b = fold_assignment(10, 4, 7);
        assert_eq!(a, b);
        let mut all: Vec<usize> = a.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        let sizes: Vec<usize> = a.iter().map(|f| f.len()).collect();
        assert_eq!(sizes, vec![3, 3, 2, 2]);
        assert_ne!(fold_assignment(10, 4, 8), a);
    }

    #[test]
    fn cross_validate_guards() {
        let ds = Dataset::new(
            "d",
            vec![
                mk_topic("a", &["beta"], &[("x", 1.0), ("y", 2.0)]),
                mk_topic("b", &["beta"], &[("x", 1.0), ("y", 2.0)]),
                mk_topic("c", &["beta"], &[("x", 1.0), ("y", 2.0)]),
            ],
        )
        .unwrap();
        let cfgs = CvConfigs::default();
        assert!(matches!(
            cross_validate(&ds, Algorithm::MsU, 1, &cfgs, 0),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            cross_validate(&ds, Algorithm::MsU, 4, &cfgs, 0),
            Err(Error::TooFewTopics { have: 3, need: 4 })
        ));
    }

    #[test]
    fn evaluate_with_scorer_reports_every_topic() {
        let ds = Dataset::new(
            "d",
            vec![
                mk_topic("a", &["beta gamma"], &[("alpha alpha", 1.0), ("beta gamma", 2.0)]),
                mk_topic("b", &["gamma delta"], &[("alpha beta", 0.5), ("gamma delta", 1.5)]),
            ],
        )
        .unwrap();
        let vocab = corpus::build_vocabulary(&ds, &TokenizerConfig::default()).unwrap();
        let scorer = Scorer::Theta(uniform_model(&vocab));
        let report = evaluate_with_scorer(
            &ds,
            &scorer,
            &vocab,
            &TokenizerConfig::default(),
            &ScoringConfig::default(),
        )
        .unwrap();
        assert_eq!(report.per_topic.len(), 2);
        assert_eq!(report.aggregate.n_topics, 2);
        assert!(report.aggregate.mean_tau.is_some());
        assert!(report.aggregate.mean_reference_rank.is_some());
        let csv = report.per_topic_csv();
        assert!(csv.starts_with("topic_id,kendall_tau,reference_mean_rank\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
