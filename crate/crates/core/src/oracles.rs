//! Ground truth for the optimizer and the closed forms.
//!
//! * [`dag_select_one_optimum`] solves the one-repeater-per-layer problem
//!   exactly as a longest path over log channel magnitudes.
//! * [`exhaustive_discrete_optimum`] enumerates every vertex of the
//!   discrete activation sets.
//! * [`simulate_transmission`] pushes a symbol and fresh receiver noise
//!   through the network hop by hop.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::activation::{ActivationPolicy, ActivationSet};
use crate::cascade::{check_profile, propagate, total_channel};
use crate::channel::{complex_gaussian, ChannelStack};
use crate::error::{PolarError, Result};
use crate::profile::AmplificationProfile;
use crate::rng::rng_from_seed;
use crate::snr::NoiseModel;

/// Largest number of feasible combinations [`exhaustive_discrete_optimum`]
/// will enumerate.
pub const MAX_ENUMERATION: u128 = 1_000_000;

/// Best single-repeater-per-layer selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSolution {
    /// Selected repeater (0-based) in each layer.
    pub indices: Vec<usize>,
    /// `|h_tot|` with only the selected repeaters on, at gain `β_i`.
    pub objective: f64,
    /// Sum of the log-magnitudes the path was chosen by.
    pub log_objective: f64,
}

/// `Π |entries along the path| · Π β_i`, multiplied in hop order.
pub fn path_magnitude(stack: &ChannelStack, indices: &[usize], betas: &[f64]) -> f64 {
    let n = stack.layers();
    let mut value = stack.hop(0)[[indices[0], 0]].norm();
    for k in 1..n {
        value *= stack.hop(k)[[indices[k], indices[k - 1]]].norm();
    }
    value *= stack.hop(n)[[0, indices[n - 1]]].norm();
    betas.iter().fold(value, |acc, b| acc * b)
}

/// Optimal select-one gains by dynamic programming over the layered graph,
/// in `O(Σ m_i m_{i+1})`. Zero entries get weight `-∞`. Ties go to the
/// lowest index, both for the final repeater and for every predecessor.
pub fn dag_select_one_optimum(stack: &ChannelStack, betas: &[f64]) -> Result<PathSolution> {
    let n = stack.layers();
    if betas.len() != n {
        return Err(PolarError::Dimension(format!(
            "{} budgets for {n} layers",
            betas.len()
        )));
    }
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
        return Err(PolarError::Domain(format!(
            "budgets must be positive, got {b}"
        )));
    }

    let mut score: Vec<f64> = stack
        .hop(0)
        .column(0)
        .iter()
        .map(|z| z.norm().ln())
        .collect();
    let mut predecessors: Vec<Vec<usize>> = Vec::with_capacity(n - 1);
    for k in 1..n {
        let hop = stack.hop(k);
        let mut next = Vec::with_capacity(hop.nrows());
        let mut pred = Vec::with_capacity(hop.nrows());
        for row in hop.rows() {
            let (best_c, best) =
                argmax_lowest(row.iter().zip(&score).map(|(h, s)| s + h.norm().ln()));
            next.push(best);
            pred.push(best_c);
        }
        score = next;
        predecessors.push(pred);
    }
    let (last, best) = argmax_lowest(
        stack
            .hop(n)
            .row(0)
            .iter()
            .zip(&score)
            .map(|(h, s)| s + h.norm().ln()),
    );
    if best == f64::NEG_INFINITY {
        return Err(PolarError::Degenerate(
            "every repeater path crosses a zero channel".into(),
        ));
    }

    let mut indices = vec![0; n];
    indices[n - 1] = last;
    for k in (1..n).rev() {
        indices[k - 1] = predecessors[k - 1][indices[k]];
    }
    Ok(PathSolution {
        objective: path_magnitude(stack, &indices, betas),
        log_objective: best + betas.iter().map(|b| b.ln()).sum::<f64>(),
        indices,
    })
}

fn argmax_lowest(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (j, v) in values.enumerate() {
        if v > best.1 {
            best = (j, v);
        }
    }
    best
}

/// Largest `|h_tot|²` over every vertex combination, with its gains.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOptimum {
    pub objective: f64,
    pub profile: AmplificationProfile,
}

fn binomial(m: usize, j: usize) -> u128 {
    (0..j).fold(1u128, |acc, t| {
        acc.saturating_mul((m - t) as u128) / (t as u128 + 1)
    })
}

fn candidate_count(set: &ActivationSet, m: usize) -> Result<u128> {
    Ok(match *set {
        ActivationSet::BallInf { .. } => {
            if m >= 64 {
                u128::MAX
            } else {
                1u128 << m
            }
        }
        ActivationSet::AtMostK { k, .. } => {
            (0..=k.min(m)).fold(0u128, |acc, j| acc.saturating_add(binomial(m, j)))
        }
        ActivationSet::SelectOne { .. } => m as u128,
        ActivationSet::Ball2 { .. } => {
            return Err(PolarError::Unsupported(
                "the 2-ball is continuous and cannot be enumerated".into(),
            ))
        }
    })
}

fn candidates(set: &ActivationSet, m: usize) -> Vec<Vec<f64>> {
    let beta = set.beta();
    let from_mask = |mask: u64| -> Vec<f64> {
        (0..m)
            .map(|j| if mask >> j & 1 == 1 { beta } else { 0.0 })
            .collect()
    };
    match *set {
        ActivationSet::BallInf { .. } => (0..1u64 << m).map(from_mask).collect(),
        ActivationSet::AtMostK { k, .. } => (0..1u64 << m)
            .filter(|mask| mask.count_ones() as usize <= k)
            .map(from_mask)
            .collect(),
        ActivationSet::SelectOne { .. } => (0..m).map(|j| from_mask(1 << j)).collect(),
        ActivationSet::Ball2 { .. } => unreachable!("rejected by candidate_count"),
    }
}

/// Enumerates every combination of per-layer vertices. The ∞-ball is
/// represented by its `{0, β}^m` vertices and the 1-ball by its one-hot
/// vertices, where the layer-wise linear maximum is always attained.
pub fn exhaustive_discrete_optimum(
    stack: &ChannelStack,
    policy: &ActivationPolicy,
) -> Result<DiscreteOptimum> {
    let n = stack.layers();
    if policy.layers() != n {
        return Err(PolarError::Dimension(format!(
            "policy has {} layers, network has {n}",
            policy.layers()
        )));
    }
    let sizes = stack.layer_sizes().as_slice();
    let mut total = 1u128;
    for (set, &m) in policy.sets().iter().zip(sizes) {
        total = total.saturating_mul(candidate_count(set, m)?);
    }
    if total > MAX_ENUMERATION {
        return Err(PolarError::TooLarge(format!(
            "{total} combinations exceed the limit of {MAX_ENUMERATION}"
        )));
    }
    let per_layer: Vec<Vec<Vec<f64>>> = policy
        .sets()
        .iter()
        .zip(sizes)
        .map(|(set, &m)| candidates(set, m))
        .collect();

    struct Search<'a> {
        stack: &'a ChannelStack,
        per_layer: &'a [Vec<Vec<f64>>],
        choice: Vec<usize>,
        best: f64,
        best_choice: Vec<usize>,
    }

    impl Search<'_> {
        fn descend(&mut self, layer: usize, input: &[Complex64]) {
            let n = self.per_layer.len();
            for (c, gains) in self.per_layer[layer].iter().enumerate() {
                self.choice[layer] = c;
                let out = propagate(self.stack.hop(layer + 1), gains, input);
                if layer + 1 == n {
                    let value = out[0].norm_sqr();
                    if value > self.best {
                        self.best = value;
                        self.best_choice.clone_from(&self.choice);
                    }
                } else {
                    self.descend(layer + 1, &out);
                }
            }
        }
    }

    let mut search = Search {
        stack,
        per_layer: &per_layer,
        choice: vec![0; n],
        best: f64::NEG_INFINITY,
        best_choice: vec![0; n],
    };
    let start: Vec<Complex64> = stack.hop(0).column(0).to_vec();
    search.descend(0, &start);

    let profile = AmplificationProfile::new(
        search
            .best_choice
            .iter()
            .zip(&per_layer)
            .map(|(&c, cands)| cands[c].clone())
            .collect(),
    )?;
    Ok(DiscreteOptimum {
        objective: search.best,
        profile,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkDirection {
    Downlink,
    Uplink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionSamples {
    /// Received symbol `y` for each draw.
    pub received: Vec<Complex64>,
    /// Empirical variance of `y - h_tot·x`.
    pub noise_variance: f64,
    pub channel: Complex64,
}

/// Symbol-level simulation of one transmission per draw.
///
/// Downlink: layer 1 hears `H(1,0)x + w_1`, layer `i` hears
/// `H(i,i-1) D_{i-1} r_{i-1} + w_i`, the user hears
/// `H(n+1,n) D_n r_n + w_{n+1}`. Uplink runs the transposed hops from the
/// user back to the base station, which adds `w_0`.
pub fn simulate_transmission(
    stack: &ChannelStack,
    profile: &AmplificationProfile,
    noise: &NoiseModel,
    direction: LinkDirection,
    symbol: Complex64,
    draws: usize,
    seed: u64,
) -> Result<TransmissionSamples> {
    check_profile(stack, profile)?;
    if noise.layers() != stack.layers() {
        return Err(PolarError::Dimension(format!(
            "noise model covers {} layers, network has {}",
            noise.layers(),
            stack.layers()
        )));
    }
    if draws == 0 {
        return Err(PolarError::Domain("need at least one draw".into()));
    }
    let n = stack.layers();
    let transposed: Vec<_> = stack.hops().iter().map(|h| h.t().to_owned()).collect();
    let channel = total_channel(stack, profile)?;
    let mut rng = rng_from_seed(seed);

    let mut add_noise = |signal: &mut [Complex64], sigma: f64| {
        if sigma > 0.0 {
            for s in signal.iter_mut() {
                *s += complex_gaussian(&mut rng) * sigma;
            }
        }
    };

    let mut received = Vec::with_capacity(draws);
    for _ in 0..draws {
        let y = match direction {
            LinkDirection::Downlink => {
                let mut r: Vec<Complex64> =
                    stack.hop(0).column(0).iter().map(|h| h * symbol).collect();
                add_noise(&mut r, noise.repeater(0));
                for k in 1..n {
                    r = propagate(stack.hop(k), profile.layer(k - 1), &r);
                    add_noise(&mut r, noise.repeater(k));
                }
                let mut y = propagate(stack.hop(n), profile.layer(n - 1), &r);
                add_noise(&mut y, noise.user());
                y[0]
            }
            LinkDirection::Uplink => {
                let mut r: Vec<Complex64> =
                    transposed[n].column(0).iter().map(|h| h * symbol).collect();
                add_noise(&mut r, noise.repeater(n - 1));
                for k in (1..n).rev() {
                    r = propagate(&transposed[k], profile.layer(k), &r);
                    add_noise(&mut r, noise.repeater(k - 1));
                }
                let mut y = propagate(&transposed[0], profile.layer(0), &r);
                add_noise(&mut y, noise.base_station());
                y[0]
            }
        };
        received.push(y);
    }

    let errors: Vec<Complex64> = received.iter().map(|y| y - channel * symbol).collect();
    let mean: Complex64 = errors.iter().sum::<Complex64>() / draws as f64;
    let noise_variance = errors.iter().map(|e| (e - mean).norm_sqr()).sum::<f64>() / draws as f64;
    Ok(TransmissionSamples {
        received,
        noise_variance,
        channel,
    })
}
