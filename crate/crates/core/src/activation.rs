//! Activation sets and the per-layer maximization step.
//!
//! Every update maximizes the linear form `gᵀα` over the layer's set, with
//! `g = Re{Yᴴ Y α_old}`. Because `gᵀα_old = |h_tot|²`, the quadratic
//! objective cannot decrease when `α_old` is feasible.
//!
//! When `g` has no positive entry there is nothing to select and the old
//! gains are kept. That only happens when `h_tot = 0`. Ties between equal
//! entries of `g` go to the lowest index.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PolarError, Result};

/// Relative slack used when checking norm constraints.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Constraint on the gain vector of a single layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActivationSet {
    /// Non-negative 2-ball: total layer power at most `beta²`.
    Ball2 { beta: f64 },
    /// Non-negative ∞-ball: every repeater's power at most `beta²`.
    BallInf { beta: f64 },
    /// At most `k` repeaters on, each with gain exactly `beta`.
    AtMostK { beta: f64, k: usize },
    /// Non-negative 1-ball; optimal points switch on a single repeater.
    SelectOne { beta: f64 },
}

impl ActivationSet {
    pub fn beta(&self) -> f64 {
        match *self {
            ActivationSet::Ball2 { beta }
            | ActivationSet::BallInf { beta }
            | ActivationSet::AtMostK { beta, .. }
            | ActivationSet::SelectOne { beta } => beta,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ActivationSet::Ball2 { .. } => "ball2",
            ActivationSet::BallInf { .. } => "ball_inf",
            ActivationSet::AtMostK { .. } => "at_most_k",
            ActivationSet::SelectOne { .. } => "select_one",
        }
    }

    /// True for the sets whose optimizer iterates live on a finite grid.
    pub fn is_discrete(&self) -> bool {
        !matches!(self, ActivationSet::Ball2 { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let beta = self.beta();
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(PolarError::Domain(format!(
                "{} budget must be positive and finite, got {beta}",
                self.name()
            )));
        }
        if let ActivationSet::AtMostK { k, .. } = *self {
            if k == 0 {
                return Err(PolarError::Domain("at_most_k needs k >= 1".into()));
            }
        }
        Ok(())
    }

    /// Membership test. Norm balls allow a relative slack of
    /// [`NORM_TOLERANCE`]; the at-most-K set is checked exactly.
    pub fn contains(&self, alpha: &[f64]) -> bool {
        if alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return false;
        }
        let limit = self.beta() * (1.0 + NORM_TOLERANCE);
        match *self {
            ActivationSet::Ball2 { .. } => l2_norm(alpha) <= limit,
            ActivationSet::BallInf { .. } => alpha.iter().all(|&a| a <= limit),
            ActivationSet::AtMostK { beta, k } => {
                alpha.iter().all(|&a| a == 0.0 || a == beta)
                    && alpha.iter().filter(|&&a| a == beta).count() <= k
            }
            ActivationSet::SelectOne { .. } => alpha.iter().sum::<f64>() <= limit,
        }
    }

    /// Returns a maximizer of `gᵀα` over the set, or `current` when `g` has
    /// no positive entry.
    pub fn maximize_linear(&self, g: &[f64], current: &[f64]) -> Vec<f64> {
        if !g.iter().any(|&x| x > 0.0) {
            return current.to_vec();
        }
        match *self {
            ActivationSet::Ball2 { beta } => {
                let relu: Vec<f64> = g.iter().map(|&x| x.max(0.0)).collect();
                let norm = l2_norm(&relu);
                relu.into_iter().map(|x| beta * x / norm).collect()
            }
            ActivationSet::BallInf { beta } => g
                .iter()
                .map(|&x| if x > 0.0 { beta } else { 0.0 })
                .collect(),
            ActivationSet::AtMostK { beta, k } => {
                let mut alpha = vec![0.0; g.len()];
                for j in top_k_positive(g, k) {
                    alpha[j] = beta;
                }
                alpha
            }
            ActivationSet::SelectOne { beta } => {
                let mut alpha = vec![0.0; g.len()];
                alpha[top_k_positive(g, 1)[0]] = beta;
                alpha
            }
        }
    }
}

/// One activation set per repeater layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationPolicy {
    layers: Vec<ActivationSet>,
}

impl ActivationPolicy {
    pub fn new(layers: Vec<ActivationSet>) -> Result<Self> {
        if layers.is_empty() {
            return Err(PolarError::Domain(
                "policy must cover at least one layer".into(),
            ));
        }
        for set in &layers {
            set.validate()?;
        }
        Ok(Self { layers })
    }

    /// The same set on each of `n` layers.
    pub fn uniform(set: ActivationSet, n: usize) -> Result<Self> {
        Self::new(vec![set; n])
    }

    pub fn layers(&self) -> usize {
        self.layers.len()
    }

    pub fn set(&self, layer: usize) -> &ActivationSet {
        &self.layers[layer]
    }

    pub fn sets(&self) -> &[ActivationSet] {
        &self.layers
    }

    pub fn betas(&self) -> Vec<f64> {
        self.layers.iter().map(ActivationSet::beta).collect()
    }
}

/// `g = Re{Yᴴ (Y α)}`, computed in `O(m)`.
pub fn ascent_direction(y: &[Complex64], alpha: &[f64]) -> Vec<f64> {
    let h: Complex64 = y.iter().zip(alpha).map(|(yj, &a)| yj * a).sum();
    y.iter().map(|yj| (yj.conj() * h).re).collect()
}

/// New gains for one layer given its observation row `y`.
pub fn layer_update(y: &[Complex64], alpha: &[f64], set: &ActivationSet) -> Vec<f64> {
    set.maximize_linear(&ascent_direction(y, alpha), alpha)
}

pub(crate) fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Indices of the `min(k, #positive)` largest positive entries, ordered by
/// value (descending) and then index (ascending).
fn top_k_positive(g: &[f64], k: usize) -> Vec<usize> {
    let mut positive: Vec<usize> = (0..g.len()).filter(|&j| g[j] > 0.0).collect();
    let order = |a: &usize, b: &usize| -> Ordering {
        g[*b]
            .partial_cmp(&g[*a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    };
    if positive.len() > k {
        positive.select_nth_unstable_by(k - 1, order);
        positive.truncate(k);
    }
    positive.sort_unstable_by(order);
    positive
}
