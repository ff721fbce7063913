//! The layer-by-layer ascent loop.
//!
//! Outer passes alternate direction: even passes sweep layers `0..n`
//! (downlink order), odd passes sweep `n-1..=0` (uplink order). Each inner
//! update recomputes exactly one partial product in the cache, replaces the
//! layer's gains with the maximizer of its linear form and records
//! `|h_tot|²`.

use serde::{Deserialize, Serialize};

use crate::activation::{layer_update, ActivationPolicy};
use crate::cascade::{check_profile, total_channel, CascadeCache};
use crate::channel::ChannelStack;
use crate::error::{PolarError, Result};
use crate::profile::AmplificationProfile;

/// Relative slack allowed when checking the objective trace for monotonicity.
pub const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCriterion {
    /// Upper bound `N` on outer passes.
    pub max_outer_passes: usize,
    /// Stop once a whole pass raises `|h_tot|` by no more than this. `None`
    /// always runs `max_outer_passes` passes.
    pub epsilon: Option<f64>,
}

impl ConvergenceCriterion {
    pub fn passes(max_outer_passes: usize) -> Self {
        Self {
            max_outer_passes,
            epsilon: None,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_outer_passes == 0 {
            return Err(PolarError::Domain("need at least one outer pass".into()));
        }
        if let Some(eps) = self.epsilon {
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(PolarError::Domain(format!(
                    "epsilon must be non-negative and finite, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for ConvergenceCriterion {
    fn default() -> Self {
        Self::passes(20)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminationReason {
    MaxPasses,
    EpsilonStall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// `|h_tot|²` before the first update.
    pub initial_objective: f64,
    /// `|h_tot|²` after every inner update.
    pub objective_trace: Vec<f64>,
    pub final_profile: AmplificationProfile,
    pub passes_used: usize,
    pub termination_reason: TerminationReason,
}

impl RunRecord {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace
            .last()
            .copied()
            .unwrap_or(self.initial_objective)
    }

    /// True when no step lowered the objective by more than
    /// [`MONOTONE_SLACK`] relative.
    pub fn is_monotone(&self) -> bool {
        is_monotone(self.initial_objective, &self.objective_trace)
    }
}

pub fn is_monotone(initial: f64, trace: &[f64]) -> bool {
    let mut prev = initial;
    for &x in trace {
        if x < prev - MONOTONE_SLACK * prev.abs() {
            return false;
        }
        prev = x;
    }
    true
}

/// Runs the alternating forward/backward ascent from `init`.
pub fn run_polarnet(
    stack: &ChannelStack,
    policy: &ActivationPolicy,
    init: &AmplificationProfile,
    criterion: &ConvergenceCriterion,
) -> Result<RunRecord> {
    criterion.validate()?;
    check_profile(stack, init)?;
    init.check_feasible(policy)?;
    let h0 = total_channel(stack, init)?;
    if h0.norm_sqr() == 0.0 {
        return Err(PolarError::Precondition(
            "the initial total channel is zero".into(),
        ));
    }

    let n = stack.layers();
    let mut profile = init.clone();
    let mut cache = CascadeCache::build(stack, &profile)?;
    let mut trace = Vec::with_capacity(criterion.max_outer_passes * n);
    let mut pass_start = h0.norm();
    let mut termination_reason = TerminationReason::MaxPasses;
    let mut passes_used = 0;

    for pass in 0..criterion.max_outer_passes {
        let forward = pass % 2 == 0;
        for step in 0..n {
            let layer = if forward { step } else { n - 1 - step };
            if forward && layer > 0 {
                cache.forward_step(stack, &profile, layer)?;
            } else if !forward && layer + 1 < n {
                cache.backward_step(stack, &profile, layer)?;
            }
            let y = cache.observation(layer)?;
            let alpha = layer_update(&y, profile.layer(layer), policy.set(layer));
            // An unchanged profile keeps its objective bit for bit, whichever
            // side of the cache it would be recomputed from.
            if alpha == profile.layer(layer) {
                trace.push(trace.last().copied().unwrap_or(h0.norm_sqr()));
                continue;
            }
            let h: crate::Complex64 = y.iter().zip(&alpha).map(|(yj, a)| yj * a).sum();
            profile.set_layer(layer, alpha);
            cache.mark_updated(layer);
            trace.push(h.norm_sqr());
        }
        passes_used = pass + 1;

        if let Some(eps) = criterion.epsilon {
            let now = trace.last().copied().unwrap_or_default().sqrt();
            if now - pass_start <= eps {
                termination_reason = TerminationReason::EpsilonStall;
                break;
            }
            pass_start = now;
        }
    }

    Ok(RunRecord {
        initial_objective: h0.norm_sqr(),
        objective_trace: trace,
        final_profile: profile,
        passes_used,
        termination_reason,
    })
}
