//! Extractive summarization: select the sentence subset that maximizes the
//! summary score under a word budget.
//!
//! The objective is neither linear nor submodular, so the optimizers make no
//! structural assumptions: a greedy baseline and a small evolutionary loop
//! that always starts from (and therefore never falls below) the greedy
//! solution.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, TokenizerConfig, Topic, Vocabulary};
use crate::divergence::UnitDistribution;
use crate::scoring::{self, KnowledgeModel, ScoringConfig};
use crate::{Error, Result};

/// Words that end in a period without ending a sentence.
const ABBREVIATIONS: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "rev", "gen", "col", "sgt", "capt", "lt", "hon", "sr", "jr",
    "st", "vs", "etc", "inc", "ltd", "co", "no", "fig", "eq", "jan", "feb", "mar", "apr", "jun",
    "jul", "aug", "sep", "sept", "oct", "nov", "dec",
];

/// Raw word count of a text (no stopword filtering).
pub fn word_count(text: &str) -> usize {
    corpus::tokenize(text, &TokenizerConfig::default()).len()
}

fn is_abbreviation(word: &str) -> bool {
    ABBREVIATIONS.contains(&word.to_lowercase().as_str())
}

/// Splits on terminal punctuation (`.`, `!`, `?`) followed by whitespace and
/// an uppercase letter or digit. A period after a known abbreviation does
/// not end a sentence.
pub fn split_into_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        if matches!(chars[i], '.' | '!' | '?') {
            let punct_start = i;
            let mut end = i;
            while end + 1 < chars.len() && matches!(chars[end + 1], '.' | '!' | '?') {
                end += 1;
            }
            // Next non-whitespace character after the punctuation run.
            let mut j = end + 1;
            let mut saw_ws = false;
            while j < chars.len() && chars[j].is_whitespace() {
                saw_ws = true;
                j += 1;
            }
            let next_starts_sentence =
                j < chars.len() && (chars[j].is_uppercase() || chars[j].is_numeric());
            let mut boundary = saw_ws && next_starts_sentence;
            if boundary && chars[punct_start] == '.' && end == punct_start {
                // Look back at the word right before the period.
                let mut w = punct_start;
                while w > 0 && chars[w - 1].is_alphanumeric() {
                    w -= 1;
                }
                let word: String = chars[w..punct_start].iter().collect();
                if is_abbreviation(&word) {
                    boundary = false;
                }
            }
            if boundary {
                let sentence: String = chars[start..=end].iter().collect();
                let trimmed = sentence.trim();
                if !trimmed.is_empty() {
                    sentences.push(trimmed.to_string());
                }
                start = j;
                i = j;
                continue;
            }
            i = end + 1;
            continue;
        }
        i += 1;
    }
    if start < chars.len() {
        let tail: String = chars[start..].iter().collect();
        let trimmed = tail.trim();
        if !trimmed.is_empty() {
            sentences.push(trimmed.to_string());
        }
    }
    sentences
}

/// One candidate sentence with its precomputed statistics.
#[derive(Debug, Clone)]
pub struct SentenceInfo {
    pub text: String,
    /// Raw word count, used against the budget.
    pub word_count: usize,
    /// In-vocabulary token count, the sentence's weight in mixtures.
    pub invocab_count: usize,
    pub dist: UnitDistribution,
}

/// The selectable sentences of one topic.
#[derive(Debug, Clone)]
pub struct SentencePool {
    pub topic_id: String,
    pub sentences: Vec<SentenceInfo>,
}

/// Splits a topic's documents into the sentence pool. Sentences without
/// words are dropped; an empty result is an error.
pub fn split_sentences(
    topic: &Topic,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
) -> Result<SentencePool> {
    let mut sentences = Vec::new();
    for doc in &topic.documents {
        for text in split_into_sentences(doc) {
            let words = word_count(&text);
            if words == 0 {
                continue;
            }
            let dist = corpus::text_to_distribution(&text, vocab, tokenizer);
            let invocab = corpus::tokenize(&text, tokenizer)
                .iter()
                .filter(|t| vocab.get(t).is_some())
                .count();
            sentences.push(SentenceInfo {
                text,
                word_count: words,
                invocab_count: invocab,
                dist,
            });
        }
    }
    if sentences.is_empty() {
        return Err(Error::DegenerateInput(format!(
            "topic `{}` has no sentences",
            topic.id
        )));
    }
    Ok(SentencePool {
        topic_id: topic.id.clone(),
        sentences,
    })
}

/// Total raw word count of a selection.
pub fn selection_words(pool: &SentencePool, selection: &[usize]) -> usize {
    selection.iter().map(|&i| pool.sentences[i].word_count).sum()
}

/// The unit distribution of the concatenation of the selected sentences:
/// the in-vocabulary-count-weighted mixture of their distributions.
pub fn selection_distribution(pool: &SentencePool, selection: &[usize]) -> UnitDistribution {
    let n = pool
        .sentences
        .first()
        .map(|s| s.dist.len())
        .unwrap_or(1);
    let mut acc = vec![0.0f64; n];
    let mut total = 0usize;
    for &i in selection {
        let s = &pool.sentences[i];
        for (a, p) in acc.iter_mut().zip(s.dist.probs()) {
            *a += s.invocab_count as f64 * p;
        }
        total += s.invocab_count;
    }
    if total == 0 {
        return UnitDistribution::empty_support_fallback(n);
    }
    for a in &mut acc {
        *a /= total as f64;
    }
    UnitDistribution::new(acc).expect("weighted mixture stays on the simplex")
}

/// `theta_K` of a selection; the empty selection scores negative infinity.
pub fn score_selection(
    pool: &SentencePool,
    selection: &[usize],
    d: &UnitDistribution,
    model: &KnowledgeModel,
    config: &ScoringConfig,
) -> f64 {
    if selection.is_empty() {
        return f64::NEG_INFINITY;
    }
    let s = selection_distribution(pool, selection);
    scoring::theta(&s, d, model, config).unwrap_or(f64::NEG_INFINITY)
}

/// Greedy selection: repeatedly add the sentence that maximizes the score of
/// the candidate summary while it fits the budget; stop when no addition
/// fits or improves. Returns ascending indices.
pub fn greedy_summarize(
    pool: &SentencePool,
    d: &UnitDistribution,
    model: &KnowledgeModel,
    budget: usize,
    config: &ScoringConfig,
) -> Vec<usize> {
    let mut selected: Vec<usize> = Vec::new();
    let mut words = 0usize;
    let mut current = f64::NEG_INFINITY;
    loop {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..pool.sentences.len() {
            if selected.contains(&i) {
                continue;
            }
            if words + pool.sentences[i].word_count > budget {
                continue;
            }
            let mut cand = selected.clone();
            cand.push(i);
            let score = score_selection(pool, &cand, d, model, config);
            if best.map_or(true, |(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        match best {
            Some((i, score)) if score > current => {
                words += pool.sentences[i].word_count;
                selected.push(i);
                current = score;
            }
            _ => break,
        }
    }
    selected.sort_unstable();
    selected
}

/// Parameters of the evolutionary optimizer.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GeneticConfig {
    pub population: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub seed: u64,
    /// Word budget of the summary.
    pub length_budget: usize,
}

impl Default for GeneticConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 200,
            mutation_rate: 0.2,
            crossover_rate: 0.8,
            seed: 0,
            length_budget: 100,
        }
    }
}

impl GeneticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidConfig("population must be at least 2".into()));
        }
        if self.length_budget == 0 {
            return Err(Error::InvalidConfig("length budget must be positive".into()));
        }
        for (name, r) in [
            ("mutation_rate", self.mutation_rate),
            ("crossover_rate", self.crossover_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {r}"
                )));
            }
        }
        Ok(())
    }
}

struct Evolver<'a> {
    pool: &'a SentencePool,
    d: &'a UnitDistribution,
    model: &'a KnowledgeModel,
    config: &'a ScoringConfig,
    budget: usize,
}

impl<'a> Evolver<'a> {
    fn selection(members: &[bool]) -> Vec<usize> {
        members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }

    fn words(&self, members: &[bool]) -> usize {
        selection_words(self.pool, &Self::selection(members))
    }

    fn fitness(&self, members: &[bool]) -> f64 {
        score_selection(self.pool, &Self::selection(members), self.d, self.model, self.config)
    }

    /// Drops the member whose removal hurts the score least until the
    /// selection fits the budget.
    fn repair(&self, members: &mut Vec<bool>) {
        while self.words(members) > self.budget {
            let selected = Self::selection(members);
            let mut best: Option<(usize, f64)> = None;
            for &i in &selected {
                members[i] = false;
                let score = self.fitness(members);
                members[i] = true;
                if best.map_or(true, |(_, b)| score > b) {
                    best = Some((i, score));
                }
            }
            match best {
                Some((i, _)) => members[i] = false,
                None => break,
            }
        }
    }

    fn random_feasible(&self, rng: &mut ChaCha12Rng) -> Vec<bool> {
        let n = self.pool.sentences.len();
        let mut members = vec![false; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut words = 0usize;
        for i in order {
            let w = self.pool.sentences[i].word_count;
            if words + w <= self.budget && rng.gen_bool(0.7) {
                members[i] = true;
                words += w;
            }
        }
        members
    }

    fn mutate(&self, members: &mut [bool], rng: &mut ChaCha12Rng) {
        let selected = Self::selection(members);
        let unselected: Vec<usize> = (0..members.len()).filter(|i| !members[*i]).collect();
        match (selected.is_empty(), unselected.is_empty()) {
            (false, false) => {
                // Swap one selected sentence for one unselected.
                let out = selected[rng.gen_range(0..selected.len())];
                let inn = unselected[rng.gen_range(0..unselected.len())];
                members[out] = false;
                members[inn] = true;
            }
            (true, false) => {
                let inn = unselected[rng.gen_range(0..unselected.len())];
                members[inn] = true;
            }
            (false, true) => {
                let out = selected[rng.gen_range(0..selected.len())];
                members[out] = false;
            }
            (true, true) => {}
        }
    }
}

/// Evolves budget-feasible sentence subsets and returns the best selection
/// ever seen. The greedy solution seeds the initial population, so the
/// result never scores below greedy.
pub fn genetic_summarize(
    pool: &SentencePool,
    d: &UnitDistribution,
    model: &KnowledgeModel,
    genetic: &GeneticConfig,
    config: &ScoringConfig,
) -> Result<Vec<usize>> {
    genetic.validate()?;
    if pool.sentences.is_empty() {
        return Err(Error::DegenerateInput("empty sentence pool".into()));
    }
    let n = pool.sentences.len();
    let evolver = Evolver {
        pool,
        d,
        model,
        config,
        budget: genetic.length_budget,
    };
    let mut rng = ChaCha12Rng::seed_from_u64(genetic.seed);

    let greedy = greedy_summarize(pool, d, model, genetic.length_budget, config);
    let mut seed_members = vec![false; n];
    for &i in &greedy {
        seed_members[i] = true;
    }

    let mut population: Vec<Vec<bool>> = Vec::with_capacity(genetic.population);
    population.push(seed_members);
    while population.len() < genetic.population {
        let mut members = evolver.random_feasible(&mut rng);
        evolver.repair(&mut members);
        population.push(members);
    }
    let mut fitness: Vec<f64> = population.iter().map(|m| evolver.fitness(m)).collect();

    let mut best_members = population[0].clone();
    let mut best_fit = fitness[0];
    for (m, &f) in population.iter().zip(&fitness) {
        if f > best_fit {
            best_fit = f;
            best_members = m.clone();
        }
    }

    for _ in 0..genetic.generations {
        let mut next: Vec<Vec<bool>> = Vec::with_capacity(genetic.population);
        // Elitism: the best current individual survives unchanged.
        let elite = fitness
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        next.push(population[elite].clone());
        while next.len() < genetic.population {
            let p1 = tournament(&fitness, &mut rng);
            let p2 = tournament(&fitness, &mut rng);
            let mut child = if n > 1 && rng.gen_bool(genetic.crossover_rate) {
                let point = rng.gen_range(1..n);
                let mut c = population[p1][..point].to_vec();
                c.extend_from_slice(&population[p2][point..]);
                c
            } else {
                population[p1].clone()
            };
            if rng.gen_bool(genetic.mutation_rate) {
                evolver.mutate(&mut child, &mut rng);
            }
            evolver.repair(&mut child);
            next.push(child);
        }
        population = next;
        fitness = population.iter().map(|m| evolver.fitness(m)).collect();
        for (m, &f) in population.iter().zip(&fitness) {
            if f > best_fit {
                best_fit = f;
                best_members = m.clone();
            }
        }
    }
    Ok(Evolver::selection(&best_members))
}

fn tournament(fitness: &[f64], rng: &mut ChaCha12Rng) -> usize {
    let a = rng.gen_range(0..fitness.len());
    let b = rng.gen_range(0..fitness.len());
    if fitness[b] > fitness[a] {
        b
    } else {
        a
    }
}
