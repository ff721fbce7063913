//! Channel realizations.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{PolarError, Result};
use crate::network::{free_space_gain, LayerSizes, NetworkGeometry};
use crate::rng::rng_from_seed;

/// Hop-by-hop channel matrices `[H(1,0), H(2,1), …, H(n+1,n)]`.
///
/// `H(1,0)` is `m_1 × 1`, `H(i+1,i)` is `m_{i+1} × m_i` and `H(n+1,n)` is
/// `1 × m_n`. Matrix `k` maps level `k` (base station at 0) to level `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStack {
    matrices: Vec<Array2<Complex64>>,
    sizes: LayerSizes,
}

impl ChannelStack {
    pub fn new(matrices: Vec<Array2<Complex64>>) -> Result<Self> {
        if matrices.len() < 2 {
            return Err(PolarError::Dimension(format!(
                "need at least two hop matrices, got {}",
                matrices.len()
            )));
        }
        if matrices[0].ncols() != 1 {
            return Err(PolarError::Dimension(format!(
                "base station hop must have one column, got {}",
                matrices[0].ncols()
            )));
        }
        let last = &matrices[matrices.len() - 1];
        if last.nrows() != 1 {
            return Err(PolarError::Dimension(format!(
                "user hop must have one row, got {}",
                last.nrows()
            )));
        }
        for k in 1..matrices.len() {
            if matrices[k].ncols() != matrices[k - 1].nrows() {
                return Err(PolarError::Dimension(format!(
                    "hop {k} has {} columns but hop {} has {} rows",
                    matrices[k].ncols(),
                    k - 1,
                    matrices[k - 1].nrows()
                )));
            }
        }
        for (k, h) in matrices.iter().enumerate() {
            if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(PolarError::Domain(format!(
                    "hop {k} has a non-finite entry"
                )));
            }
        }
        let sizes = LayerSizes::new(
            matrices[..matrices.len() - 1]
                .iter()
                .map(|h| h.nrows())
                .collect(),
        )?;
        Ok(Self { matrices, sizes })
    }

    /// Number of repeater layers `n`.
    pub fn layers(&self) -> usize {
        self.sizes.layers()
    }

    pub fn layer_sizes(&self) -> &LayerSizes {
        &self.sizes
    }

    /// Hop matrix `H(k+1,k)`, `k = 0..=n`.
    pub fn hop(&self, k: usize) -> &Array2<Complex64> {
        &self.matrices[k]
    }

    pub fn hops(&self) -> &[Array2<Complex64>] {
        &self.matrices
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FadingSpec {
    /// Line-of-sight path with free-space loss plus scattered power; the
    /// K-factor is the ratio of line-of-sight to scattered power.
    Rician { k_factor: f64 },
    /// Geometry-free IID `CN(0, sigma_h²)` entries.
    IidGaussian { sigma_h: f64 },
}

impl FadingSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FadingSpec::Rician { k_factor } if k_factor.is_nan() || k_factor < 0.0 => {
                Err(PolarError::Domain(format!(
                    "Rician K-factor must be non-negative, got {k_factor}"
                )))
            }
            FadingSpec::IidGaussian { sigma_h } if !(sigma_h > 0.0 && sigma_h.is_finite()) => {
                Err(PolarError::Domain(format!(
                    "channel standard deviation must be positive, got {sigma_h}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Draws `z ~ CN(0, 1)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// IID `CN(0, sigma_h²)` channels for the given layer sizes.
pub fn sample_iid_channels<R: Rng + ?Sized>(
    sizes: &LayerSizes,
    sigma_h: f64,
    rng: &mut R,
) -> ChannelStack {
    let n = sizes.layers();
    let level_size = |level: usize| {
        if level == 0 || level == n + 1 {
            1
        } else {
            sizes.size(level - 1)
        }
    };
    let matrices = (0..=n)
        .map(|k| {
            Array2::from_shape_simple_fn((level_size(k + 1), level_size(k)), || {
                complex_gaussian(rng) * sigma_h
            })
        })
        .collect();
    ChannelStack {
        matrices,
        sizes: sizes.clone(),
    }
}

fn sample_rician_channels<R: Rng + ?Sized>(
    geometry: &NetworkGeometry,
    k_factor: f64,
    rng: &mut R,
) -> Result<ChannelStack> {
    let (los, scatter) = if k_factor.is_infinite() {
        (1.0, 0.0)
    } else {
        (
            (k_factor / (k_factor + 1.0)).sqrt(),
            (1.0 / (k_factor + 1.0)).sqrt(),
        )
    };
    let wavelength = geometry.wavelength();
    let levels = geometry.node_positions();
    let mut matrices = Vec::with_capacity(levels.len() - 1);
    for k in 0..levels.len() - 1 {
        let (from, to) = (&levels[k], &levels[k + 1]);
        let mut h = Array2::zeros((to.len(), from.len()));
        for (r, rx) in to.iter().enumerate() {
            for (c, tx) in from.iter().enumerate() {
                let d = rx.distance(tx);
                if d == 0.0 {
                    return Err(PolarError::Domain(format!(
                        "nodes {c} and {r} of levels {k} and {} coincide",
                        k + 1
                    )));
                }
                let amplitude = free_space_gain(d, wavelength)?.sqrt();
                let phase = Complex64::from_polar(1.0, -2.0 * PI * d / wavelength);
                // Draw unconditionally so the stream does not depend on K.
                let z = complex_gaussian(rng);
                h[[r, c]] = (phase * los + z * scatter) * amplitude;
            }
        }
        matrices.push(h);
    }
    Ok(ChannelStack {
        matrices,
        sizes: geometry.layer_sizes().clone(),
    })
}

/// Draws one channel realization. Deterministic in `seed`.
pub fn sample_channels(
    geometry: &NetworkGeometry,
    fading: &FadingSpec,
    seed: u64,
) -> Result<ChannelStack> {
    fading.validate()?;
    let mut rng = rng_from_seed(seed);
    match *fading {
        FadingSpec::Rician { k_factor } => sample_rician_channels(geometry, k_factor, &mut rng),
        FadingSpec::IidGaussian { sigma_h } => Ok(sample_iid_channels(
            geometry.layer_sizes(),
            sigma_h,
            &mut rng,
        )),
    }
}
