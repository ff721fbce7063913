//! Cascade algebra.
//!
//! For layer `i` (0-based here) the cache keeps two partial products:
//!
//! * `forward[i]`, the column `H(i,0)` of channels from the base station to
//!   the repeaters of layer `i`, including the gains of layers `< i`;
//! * `backward[i]`, the row of channels from layer `i` to the user,
//!   including the gains of layers `> i` but not those of layer `i`.
//!
//! The observation row is then `Y_i = backward[i] ∘ forward[i]` and
//! `h_tot = Y_i · α^(i)` holds exactly for every layer.
//!
//! Changing `α^(i)` invalidates `forward[k]` for `k > i` and `backward[k]`
//! for `k < i`. Sweeping the layers forwards needs only `forward_step`,
//! sweeping backwards only `backward_step`, so each step costs one hop
//! matrix-vector product.

use ndarray::Array2;
use num_complex::Complex64;

use crate::channel::ChannelStack;
use crate::error::{PolarError, Result};
use crate::profile::AmplificationProfile;

pub(crate) fn check_profile(stack: &ChannelStack, profile: &AmplificationProfile) -> Result<()> {
    if stack.layer_sizes().as_slice() != profile.sizes().as_slice() {
        return Err(PolarError::Dimension(format!(
            "channel layers {:?} do not match profile layers {:?}",
            stack.layer_sizes().as_slice(),
            profile.sizes()
        )));
    }
    Ok(())
}

/// `hop · (gains ∘ input)`.
pub(crate) fn propagate(
    hop: &Array2<Complex64>,
    gains: &[f64],
    input: &[Complex64],
) -> Vec<Complex64> {
    let scaled: Vec<Complex64> = input.iter().zip(gains).map(|(x, &a)| x * a).collect();
    hop.rows()
        .into_iter()
        .map(|row| row.iter().zip(&scaled).map(|(h, x)| h * x).sum())
        .collect()
}

/// `(input ∘ gains) · hop` for a row vector `input`.
pub(crate) fn propagate_row(
    hop: &Array2<Complex64>,
    gains: &[f64],
    input: &[Complex64],
) -> Vec<Complex64> {
    let scaled: Vec<Complex64> = input.iter().zip(gains).map(|(x, &a)| x * a).collect();
    hop.columns()
        .into_iter()
        .map(|col| col.iter().zip(&scaled).map(|(h, x)| h * x).sum())
        .collect()
}

/// End-to-end channel `H(n+1,n) D_n ⋯ D_1 H(1,0)`, left-multiplied.
pub fn total_channel(stack: &ChannelStack, profile: &AmplificationProfile) -> Result<Complex64> {
    check_profile(stack, profile)?;
    let mut v: Vec<Complex64> = stack.hop(0).column(0).to_vec();
    for k in 1..=stack.layers() {
        v = propagate(stack.hop(k), profile.layer(k - 1), &v);
    }
    Ok(v[0])
}

/// Incrementally maintained partial products, see the module docs.
#[derive(Debug, Clone)]
pub struct CascadeCache {
    forward: Vec<Vec<Complex64>>,
    backward: Vec<Vec<Complex64>>,
    forward_clean: Vec<bool>,
    backward_clean: Vec<bool>,
    multiply_adds: u64,
}

impl CascadeCache {
    /// Builds a fully clean cache from scratch.
    pub fn build(stack: &ChannelStack, profile: &AmplificationProfile) -> Result<Self> {
        check_profile(stack, profile)?;
        let n = stack.layers();
        let mut cache = Self {
            forward: vec![Vec::new(); n],
            backward: vec![Vec::new(); n],
            forward_clean: vec![false; n],
            backward_clean: vec![false; n],
            multiply_adds: 0,
        };
        cache.forward[0] = stack.hop(0).column(0).to_vec();
        cache.forward_clean[0] = true;
        cache.backward[n - 1] = stack.hop(n).row(0).to_vec();
        cache.backward_clean[n - 1] = true;
        for i in 1..n {
            cache.forward_step(stack, profile, i)?;
        }
        for i in (0..n - 1).rev() {
            cache.backward_step(stack, profile, i)?;
        }
        cache.multiply_adds = 0;
        Ok(cache)
    }

    pub fn layers(&self) -> usize {
        self.forward.len()
    }

    fn check_layer(&self, layer: usize) -> Result<()> {
        if layer >= self.layers() {
            return Err(PolarError::LayerOutOfRange {
                layer,
                layers: self.layers(),
            });
        }
        Ok(())
    }

    /// Recomputes `forward[layer]` from `forward[layer - 1]` and the current
    /// gains of layer `layer - 1`. Costs `m_{i-1}(m_i + 1)` multiply-adds.
    pub fn forward_step(
        &mut self,
        stack: &ChannelStack,
        profile: &AmplificationProfile,
        layer: usize,
    ) -> Result<()> {
        self.check_layer(layer)?;
        if layer == 0 {
            return Err(PolarError::LayerOutOfRange {
                layer,
                layers: self.layers(),
            });
        }
        if !self.forward_clean[layer - 1] {
            return Err(PolarError::StaleCache(format!(
                "forward product of layer {} is stale",
                layer - 1
            )));
        }
        let hop = stack.hop(layer);
        self.forward[layer] = propagate(hop, profile.layer(layer - 1), &self.forward[layer - 1]);
        self.multiply_adds += (hop.ncols() * (hop.nrows() + 1)) as u64;
        self.forward_clean[layer] = true;
        Ok(())
    }

    /// Recomputes `backward[layer]` from `backward[layer + 1]` and the
    /// current gains of layer `layer + 1`. Costs `m_{i+1}(m_i + 1)`
    /// multiply-adds.
    pub fn backward_step(
        &mut self,
        stack: &ChannelStack,
        profile: &AmplificationProfile,
        layer: usize,
    ) -> Result<()> {
        self.check_layer(layer)?;
        if layer + 1 >= self.layers() {
            return Err(PolarError::LayerOutOfRange {
                layer,
                layers: self.layers(),
            });
        }
        if !self.backward_clean[layer + 1] {
            return Err(PolarError::StaleCache(format!(
                "backward product of layer {} is stale",
                layer + 1
            )));
        }
        let hop = stack.hop(layer + 1);
        self.backward[layer] =
            propagate_row(hop, profile.layer(layer + 1), &self.backward[layer + 1]);
        self.multiply_adds += (hop.nrows() * (hop.ncols() + 1)) as u64;
        self.backward_clean[layer] = true;
        Ok(())
    }

    /// Records that the gains of `layer` changed.
    pub fn mark_updated(&mut self, layer: usize) {
        for clean in &mut self.forward_clean[layer + 1..] {
            *clean = false;
        }
        for clean in &mut self.backward_clean[..layer] {
            *clean = false;
        }
    }

    /// Observation row `Y_i` with `h_tot = Y_i · α^(i)`.
    pub fn observation(&self, layer: usize) -> Result<Vec<Complex64>> {
        self.check_layer(layer)?;
        if !self.forward_clean[layer] || !self.backward_clean[layer] {
            return Err(PolarError::StaleCache(format!(
                "partial products of layer {layer} are stale"
            )));
        }
        Ok(self.backward[layer]
            .iter()
            .zip(&self.forward[layer])
            .map(|(b, f)| b * f)
            .collect())
    }

    pub fn forward(&self, layer: usize) -> Option<&[Complex64]> {
        self.forward_clean
            .get(layer)
            .filter(|c| **c)
            .map(|_| self.forward[layer].as_slice())
    }

    pub fn backward(&self, layer: usize) -> Option<&[Complex64]> {
        self.backward_clean
            .get(layer)
            .filter(|c| **c)
            .map(|_| self.backward[layer].as_slice())
    }

    pub fn is_clean(&self) -> bool {
        self.forward_clean
            .iter()
            .chain(&self.backward_clean)
            .all(|c| *c)
    }

    /// Complex multiply-adds spent in `forward_step`/`backward_step` since
    /// the cache was built.
    pub fn multiply_adds(&self) -> u64 {
        self.multiply_adds
    }
}

/// Free-function form of [`CascadeCache::observation`].
pub fn observation_matrix(cache: &CascadeCache, layer: usize) -> Result<Vec<Complex64>> {
    cache.observation(layer)
}
