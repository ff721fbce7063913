use rand::distr::Open01;
use rand::Rng;

use crate::activation::{l2_norm, ActivationPolicy, ActivationSet};
use crate::error::{PolarError, Result};
use crate::network::LayerSizes;
use crate::rng::rng_from_seed;

/// Non-negative repeater gains `α^(1) … α^(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationProfile {
    alphas: Vec<Vec<f64>>,
}

impl AmplificationProfile {
    pub fn new(alphas: Vec<Vec<f64>>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(PolarError::Domain(
                "profile must cover at least one layer".into(),
            ));
        }
        for (i, layer) in alphas.iter().enumerate() {
            if layer.is_empty() {
                return Err(PolarError::Domain(format!("layer {i} has no gains")));
            }
            if let Some(a) = layer.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
                return Err(PolarError::Domain(format!(
                    "layer {i} has a negative or non-finite gain {a}"
                )));
            }
        }
        Ok(Self { alphas })
    }

    /// All gains equal to `value`.
    pub fn constant(sizes: &LayerSizes, value: f64) -> Result<Self> {
        Self::new(sizes.as_slice().iter().map(|&m| vec![value; m]).collect())
    }

    pub fn layers(&self) -> usize {
        self.alphas.len()
    }

    pub fn layer(&self, i: usize) -> &[f64] {
        &self.alphas[i]
    }

    pub fn layers_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.alphas.iter().map(Vec::as_slice)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.alphas.iter().map(Vec::len).collect()
    }

    /// Replaces layer `i`. The new gains are not validated, callers produce
    /// them from an [`ActivationSet`].
    pub(crate) fn set_layer(&mut self, i: usize, alpha: Vec<f64>) {
        debug_assert_eq!(alpha.len(), self.alphas[i].len());
        self.alphas[i] = alpha;
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.alphas
    }

    /// Checks every layer against its activation set.
    pub fn check_feasible(&self, policy: &ActivationPolicy) -> Result<()> {
        if policy.layers() != self.layers() {
            return Err(PolarError::Dimension(format!(
                "policy has {} layers, profile has {}",
                policy.layers(),
                self.layers()
            )));
        }
        for (i, (alpha, set)) in self.alphas.iter().zip(policy.sets()).enumerate() {
            if !set.contains(alpha) {
                return Err(PolarError::Precondition(format!(
                    "layer {i} gains are outside the {} set",
                    set.name()
                )));
            }
        }
        Ok(())
    }
}

/// Random feasible starting gains.
///
/// Entries are drawn uniformly from `(0, 1)` and scaled per set: to 2-norm
/// `β` for the 2-ball, 1-norm `β` for select-one and ∞-norm `β` for the
/// ∞-ball. The at-most-K set only contains `{0, β}` vectors, so there the
/// `K` largest draws are switched on at `β`.
pub fn sample_initial_profile(
    policy: &ActivationPolicy,
    sizes: &LayerSizes,
    seed: u64,
) -> Result<AmplificationProfile> {
    if policy.layers() != sizes.layers() {
        return Err(PolarError::Dimension(format!(
            "policy has {} layers, network has {}",
            policy.layers(),
            sizes.layers()
        )));
    }
    let mut rng = rng_from_seed(seed);
    let alphas = policy
        .sets()
        .iter()
        .zip(sizes.as_slice())
        .map(|(set, &m)| {
            let draws: Vec<f64> = (0..m).map(|_| rng.sample(Open01)).collect();
            scale_to_set(set, draws)
        })
        .collect();
    AmplificationProfile::new(alphas)
}

fn scale_to_set(set: &ActivationSet, draws: Vec<f64>) -> Vec<f64> {
    let beta = set.beta();
    let scale = |norm: f64| draws.iter().map(|x| beta * x / norm).collect();
    match *set {
        ActivationSet::Ball2 { .. } => scale(l2_norm(&draws)),
        ActivationSet::SelectOne { .. } => scale(draws.iter().sum()),
        ActivationSet::BallInf { .. } => scale(draws.iter().copied().fold(0.0, f64::max)),
        ActivationSet::AtMostK { k, .. } => {
            let mut order: Vec<usize> = (0..draws.len()).collect();
            order.sort_by(|&a, &b| draws[b].total_cmp(&draws[a]).then(a.cmp(&b)));
            let mut alpha = vec![0.0; draws.len()];
            for &j in order.iter().take(k) {
                alpha[j] = beta;
            }
            alpha
        }
    }
}
