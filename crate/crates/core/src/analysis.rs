//! Aggregation and interpretation of fitted knowledge models: averaging,
//! KL-to-reference curves, divergence geometry with classical MDS, top
//! known/unknown units, and comparison against renormalized IDF weights.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, Dataset, TokenizerConfig, Vocabulary};
use crate::divergence::{self, SmoothingConfig, UnitDistribution};
use crate::eval::csv_field;
use crate::scoring::{KnowledgeModel, Provenance};
use crate::{Error, Result};

fn check_same_vocab(a: &Vocabulary, b: &Vocabulary) -> Result<()> {
    if a.units() != b.units() {
        return Err(Error::VocabularyMismatch(
            "models are defined over different vocabularies".into(),
        ));
    }
    Ok(())
}

/// Arithmetic mean of the models' distributions. All models must share one
/// vocabulary.
pub fn average_models(models: &[KnowledgeModel]) -> Result<KnowledgeModel> {
    let first = models
        .first()
        .ok_or_else(|| Error::DegenerateInput("no models to average".into()))?;
    for m in models.iter().skip(1) {
        check_same_vocab(&first.vocab, &m.vocab)?;
    }
    let n = first.vocab.len();
    let mut acc = vec![0.0f64; n];
    for m in models {
        for (a, p) in acc.iter_mut().zip(m.k.probs()) {
            *a += p;
        }
    }
    let k = UnitDistribution::from_weights(&acc)?;
    let constituents: Vec<serde_json::Value> = models
        .iter()
        .map(|m| m.provenance.algorithm.clone().into())
        .collect();
    let provenance = Provenance::new("average")
        .with_param("count", models.len() as u64)
        .with_param("constituents", constituents);
    KnowledgeModel::new(first.vocab.clone(), k, provenance)
}

/// One point of an averaging curve: average `subset_size` models and measure
/// `KL(reference || average)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvePoint {
    pub subset_size: usize,
    pub mean_kl: f64,
    /// Half-width of the normal-approximation 95% confidence interval.
    pub ci_half_width: f64,
}

/// For each subset size `m = 1..=len(models)`, samples `subsets_per_size`
/// random m-subsets, averages each, and reports the mean and 95% CI of
/// `KL(reference || average)`.
pub fn averaging_curve(
    models: &[KnowledgeModel],
    reference: &KnowledgeModel,
    subsets_per_size: usize,
    seed: u64,
    smoothing: &SmoothingConfig,
) -> Result<Vec<CurvePoint>> {
    if models.len() < 2 {
        return Err(Error::DegenerateInput(
            "averaging curve needs at least two models".into(),
        ));
    }
    if subsets_per_size == 0 {
        return Err(Error::InvalidConfig(
            "subsets_per_size must be positive".into(),
        ));
    }
    for m in models {
        check_same_vocab(&reference.vocab, &m.vocab)?;
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut curve = Vec::with_capacity(models.len());
    for m in 1..=models.len() {
        let mut values = Vec::with_capacity(subsets_per_size);
        for _ in 0..subsets_per_size {
            let mut indices: Vec<usize> = (0..models.len()).collect();
            indices.shuffle(&mut rng);
            indices.truncate(m);
            let subset: Vec<KnowledgeModel> =
                indices.iter().map(|&i| models[i].clone()).collect();
            let avg = average_models(&subset)?;
            values.push(divergence::kl(&reference.k, &avg.k, smoothing)?);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let ci = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                / (values.len() - 1) as f64;
            1.96 * (var / values.len() as f64).sqrt()
        } else {
            0.0
        };
        curve.push(CurvePoint {
            subset_size: m,
            mean_kl: mean,
            ci_half_width: ci,
        });
    }
    Ok(curve)
}

/// CSV with header `m,mean_kl,ci_half_width`.
pub fn curve_to_csv(curve: &[CurvePoint]) -> String {
    let mut out = String::from("m,mean_kl,ci_half_width\n");
    for p in curve {
        out.push_str(&format!("{},{},{}\n", p.subset_size, p.mean_kl, p.ci_half_width));
    }
    out
}

/// A labeled symmetric divergence matrix, suitable for MDS.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivergenceMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl DivergenceMatrix {
    /// CSV with a header row of labels; each data row starts with its label.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(&csv_field(l));
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.values) {
            out.push_str(&csv_field(label));
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise symmetrized KL divergences between every topic document, every
/// reference summary, and the knowledge distribution:
/// `0.5 * (KL(a||b) + KL(b||a))` on smoothed inputs.
pub fn geometry_matrix(
    dataset: &Dataset,
    model: &KnowledgeModel,
    vocab: &Vocabulary,
    tokenizer: &TokenizerConfig,
    smoothing: &SmoothingConfig,
) -> Result<DivergenceMatrix> {
    if dataset.topics.is_empty() {
        return Err(Error::DegenerateInput("dataset has no topics".into()));
    }
    let mut labels = Vec::new();
    let mut points: Vec<UnitDistribution> = Vec::new();
    for topic in &dataset.topics {
        labels.push(format!("doc:{}", topic.id));
        points.push(corpus::topic_document_distribution(topic, vocab, tokenizer));
        for (i, summary) in topic.reference_summaries.iter().enumerate() {
            labels.push(format!("ref:{}:{}", topic.id, i));
            points.push(corpus::text_to_distribution(summary, vocab, tokenizer));
        }
    }
    labels.push("K".to_string());
    points.push(model.k.clone());

    let n = points.len();
    let mut values = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let ab = divergence::kl(&points[i], &points[j], smoothing)?;
            let ba = divergence::kl(&points[j], &points[i], smoothing)?;
            let sym = 0.5 * (ab + ba);
            values[i][j] = sym;
            values[j][i] = sym;
        }
    }
    Ok(DivergenceMatrix { labels, values })
}

/// Classical (Torgerson) multidimensional scaling: double-center the squared
/// divergences and read coordinates off the top eigenpairs.
///
/// The embedding is centered; each output dimension is sign-flipped so its
/// first nonzero coordinate is positive, making the result deterministic.
pub fn classical_mds(
    matrix: &DivergenceMatrix,
    dims: usize,
) -> Result<Vec<(String, Vec<f64>)>> {
    let n = matrix.labels.len();
    if n == 0 || matrix.values.len() != n || matrix.values.iter().any(|r| r.len() != n) {
        return Err(Error::DegenerateInput("malformed divergence matrix".into()));
    }
    if dims == 0 || dims > n.saturating_sub(1) {
        return Err(Error::InvalidConfig(format!(
            "dims must lie in 1..={} for {n} points, got {dims}",
            n.saturating_sub(1)
        )));
    }
    // B = -1/2 * J D^2 J with J = I - 11^T / n.
    let mut sq = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            sq[i][j] = matrix.values[i][j] * matrix.values[i][j];
        }
    }
    let row_mean: Vec<f64> = sq.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let mut b = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            b[i][j] = -0.5 * (sq[i][j] - row_mean[i] - row_mean[j] + grand);
        }
    }
    let (eigenvalues, eigenvectors) = jacobi_eigen(&b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| {
        eigenvalues[c]
            .partial_cmp(&eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut coords = vec![vec![0.0f64; dims]; n];
    for (dim, &e) in order.iter().take(dims).enumerate() {
        let scale = eigenvalues[e].max(0.0).sqrt();
        for i in 0..n {
            coords[i][dim] = eigenvectors[i][e] * scale;
        }
        // Canonical sign: first nonzero coordinate of the dimension positive.
        if let Some(first) = (0..n).find(|&i| coords[i][dim].abs() > 1e-12) {
            if coords[first][dim] < 0.0 {
                for row in coords.iter_mut() {
                    row[dim] = -row[dim];
                }
            }
        }
    }
    Ok(matrix.labels.iter().cloned().zip(coords).collect())
}

/// Kruskal stress-1 of an embedding against the divergence matrix.
pub fn mds_stress(matrix: &DivergenceMatrix, coords: &[(String, Vec<f64>)]) -> f64 {
    let n = coords.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let target = matrix.values[i][j];
            let d: f64 = coords[i]
                .1
                .iter()
                .zip(coords[j].1.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            num += (target - d) * (target - d);
            den += target * target;
        }
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        0.0
    }
}

/// CSV of MDS coordinates: `label,x0,x1,...`.
pub fn coords_to_csv(coords: &[(String, Vec<f64>)]) -> String {
    let dims = coords.first().map(|c| c.1.len()).unwrap_or(0);
    let mut out = String::from("label");
    for d in 0..dims {
        out.push_str(&format!(",x{d}"));
    }
    out.push('\n');
    for (label, row) in coords {
        out.push_str(&csv_field(label));
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// (eigenvalues, eigenvectors) with eigenvector `e` in column `e`.
fn jacobi_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0f64; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-18 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    (eigenvalues, v)
}

/// Whether high or low probability counts as the top of the list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Highest probability first: units the model treats as known.
    Known,
    /// Lowest probability first: units the model treats as unknown.
    Unknown,
}

/// The `k` most known (or unknown) units with their probabilities. Ties
/// break lexicographically.
pub fn top_units(
    model: &KnowledgeModel,
    k: usize,
    direction: Direction,
) -> Result<Vec<(String, f64)>> {
    if k > model.vocab.len() {
        return Err(Error::InvalidConfig(format!(
            "k = {k} exceeds the vocabulary size {}",
            model.vocab.len()
        )));
    }
    let mut entries: Vec<(String, f64)> = model
        .vocab
        .units()
        .iter()
        .cloned()
        .zip(model.k.probs().iter().copied())
        .collect();
    entries.sort_by(|a, b| {
        let ord = match direction {
            Direction::Known => b.1.partial_cmp(&a.1),
            Direction::Unknown => a.1.partial_cmp(&b.1),
        };
        ord.unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    entries.truncate(k);
    Ok(entries)
}

/// Raw IDF weights in `[0, 1]`: `log((N+1) / (df+1)) / log(N+1)` over a
/// background corpus of `N` documents.
pub fn idf_weights(
    vocab: &Vocabulary,
    background_docs: &[String],
    tokenizer: &TokenizerConfig,
) -> Result<Vec<f64>> {
    if background_docs.is_empty() {
        return Err(Error::DegenerateInput("background corpus is empty".into()));
    }
    let df = crate::scoring::document_frequencies(vocab, background_docs, tokenizer);
    let n = background_docs.len() as f64;
    let norm = (n + 1.0).ln();
    Ok(df
        .iter()
        .map(|&c| ((n + 1.0) / (c as f64 + 1.0)).ln() / norm)
        .collect())
}

/// Turns IDF weights into a comparable distribution:
/// `P(w_j) = (1 - IDF(w_j)) / C` with `C = sum_j (1 - IDF(w_j))`.
///
/// Known words have low IDF, so they receive high mass, matching the
/// orientation of a knowledge distribution.
pub fn renormalized_idf(weights: &[f64]) -> Result<UnitDistribution> {
    if weights.is_empty() {
        return Err(Error::DegenerateInput("no idf weights".into()));
    }
    let mut inverted = Vec::with_capacity(weights.len());
    for &w in weights {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidConfig(format!(
                "idf weight {w} outside [0, 1]"
            )));
        }
        inverted.push(1.0 - w);
    }
    if inverted.iter().sum::<f64>() <= 0.0 {
        return Err(Error::DegenerateInput(
            "all idf weights equal one; renormalization undefined".into(),
        ));
    }
    UnitDistribution::from_weights(&inverted)
}

/// Correlation between a knowledge model and an IDF-derived distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdfComparison {
    pub pearson: f64,
    pub spearman: f64,
    /// Per-unit `|K(w_j) - IDF_dist(w_j)|` for export.
    pub abs_diff: Vec<f64>,
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va <= 0.0 || vb <= 0.0 {
        return Err(Error::DegenerateInput(
            "correlation undefined for constant input".into(),
        ));
    }
    Ok(cov / (va * vb).sqrt())
}

/// Pearson and Spearman correlations plus the absolute-difference vector.
pub fn compare_to_idf(model: &KnowledgeModel, idf_dist: &UnitDistribution) -> Result<IdfComparison> {
    if model.k.len() != idf_dist.len() {
        return Err(Error::VocabularyMismatch(format!(
            "sizes differ: {} vs {}",
            model.k.len(),
            idf_dist.len()
        )));
    }
    let a = model.k.probs();
    let b = idf_dist.probs();
    let pearson = pearson(a, b)?;
    // Spearman: Pearson on average ranks.
    let ra = crate::eval::average_ranks(a);
    let rb = crate::eval::average_ranks(b);
    let spearman = pearson_ranks(&ra, &rb)?;
    let abs_diff = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).collect();
    Ok(IdfComparison {
        pearson,
        spearman,
        abs_diff,
    })
}

fn pearson_ranks(a: &[f64], b: &[f64]) -> Result<f64> {
    pearson(a, b)
}
