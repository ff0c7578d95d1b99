//! Probability-simplex mathematics: entropy, KL and JS divergences, additive
//! smoothing, and the analytic optimum of the summary score.
//!
//! All logarithms are natural; every value is in nats.

use crate::scoring::ScoringConfig;
use crate::{Error, Result};

/// Tolerance for the sum-to-one invariant of a distribution.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A dense probability distribution over the units of a vocabulary.
///
/// Entries are nonnegative and sum to one within [`SUM_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDistribution {
    probs: Vec<f64>,
    has_support: bool,
}

impl UnitDistribution {
    /// Wraps a probability vector, validating the simplex invariants.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        let mut sum = 0.0;
        for &p in &probs {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "entry {p} is negative or not finite"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, not 1"
            )));
        }
        Ok(Self {
            probs,
            has_support: true,
        })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        let mut sum = 0.0;
        for &w in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "weight {w} is negative or not finite"
                )));
            }
            sum += w;
        }
        if sum <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Self {
            probs: weights.iter().map(|w| w / sum).collect(),
            has_support: true,
        })
    }

    /// The uniform distribution over `n` units.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "uniform distribution needs at least one unit");
        Self {
            probs: vec![1.0 / n as f64; n],
            has_support: true,
        }
    }

    /// The uniform fallback used when a text has no in-vocabulary tokens.
    /// Carries `has_support() == false`.
    pub fn empty_support_fallback(n: usize) -> Self {
        let mut d = Self::uniform(n);
        d.has_support = false;
        d
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// False when the distribution was produced from a text with no
    /// in-vocabulary tokens (uniform fallback).
    pub fn has_support(&self) -> bool {
        self.has_support
    }

    /// Additively smoothed, renormalized entries: `(p_j + eps) / (1 + n*eps)`.
    pub fn smoothed(&self, smoothing: &SmoothingConfig) -> Vec<f64> {
        let eps = smoothing.epsilon;
        let z = 1.0 + self.len() as f64 * eps;
        self.probs.iter().map(|p| (p + eps) / z).collect()
    }

    /// Constructs without validating the simplex invariants. Only for
    /// numeric probe points that sit slightly off the simplex.
    pub(crate) fn new_unchecked(probs: Vec<f64>) -> Self {
        Self {
            probs,
            has_support: true,
        }
    }
}

/// Additive smoothing applied inside KL so that disjoint supports stay finite.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SmoothingConfig {
    /// Mass added to every unit before renormalization. Must be positive.
    pub epsilon: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self { epsilon: 1e-6 }
    }
}

impl SmoothingConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "smoothing epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }
}

/// Shannon entropy in nats, with the convention `0 * ln 0 = 0`.
///
/// The result lies in `[0, ln n]`.
pub fn entropy(p: &UnitDistribution) -> f64 {
    let h: f64 = p
        .probs()
        .iter()
        .map(|&x| if x > 0.0 { -x * x.ln() } else { 0.0 })
        .sum();
    // Guard against -0.0 / tiny negative rounding on point masses.
    h.max(0.0)
}

/// Kullback-Leibler divergence `KL(p || q)` on the smoothed renormalizations
/// of `p` and `q`. Always finite and nonnegative.
pub fn kl(p: &UnitDistribution, q: &UnitDistribution, smoothing: &SmoothingConfig) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let ps = p.smoothed(smoothing);
    let qs = q.smoothed(smoothing);
    let mut acc = 0.0;
    for (a, b) in ps.iter().zip(qs.iter()) {
        acc += a * (a / b).ln();
    }
    Ok(acc.max(0.0))
}

/// Jensen-Shannon divergence. Symmetric, bounded by `ln 2`, and finite
/// without smoothing because the mixture covers both supports.
pub fn js(p: &UnitDistribution, q: &UnitDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let mut acc = 0.0;
    for (&a, &b) in p.probs().iter().zip(q.probs().iter()) {
        let m = 0.5 * (a + b);
        if a > 0.0 {
            acc += 0.5 * a * (a / m).ln();
        }
        if b > 0.0 {
            acc += 0.5 * b * (b / m).ln();
        }
    }
    Ok(acc.max(0.0))
}

/// The distribution maximizing `theta_K` over the simplex for the default
/// weighting `alpha = beta = 1`: `s*_j` proportional to `d_j / k_j` on the
/// smoothed inputs.
///
/// Other weightings have no closed-form optimum here and are rejected.
pub fn optimal_summary_distribution(
    d: &UnitDistribution,
    k: &UnitDistribution,
    config: &ScoringConfig,
) -> Result<UnitDistribution> {
    if config.alpha != 1.0 || config.beta != 1.0 {
        return Err(Error::InvalidConfig(format!(
            "closed-form optimum requires alpha = beta = 1, got alpha = {}, beta = {}",
            config.alpha, config.beta
        )));
    }
    if d.len() != k.len() {
        return Err(Error::LengthMismatch {
            left: d.len(),
            right: k.len(),
        });
    }
    let ds = d.smoothed(&config.smoothing);
    let ks = k.smoothed(&config.smoothing);
    let ratios: Vec<f64> = ds.iter().zip(ks.iter()).map(|(a, b)| a / b).collect();
    UnitDistribution::from_weights(&ratios)
}
