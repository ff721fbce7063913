#![allow(dead_code)]

use ndarray::Array2;
use polarnet_core::channel::sample_iid_channels;
use polarnet_core::rng::rng_from_seed;
use polarnet_core::{
    build_grid_geometry, sample_channels, sample_initial_profile, ActivationPolicy, ActivationSet,
    AmplificationProfile, ChannelStack, Complex64, FadingSpec, LayerSizes,
};
use rand::Rng;

pub fn sizes(v: &[usize]) -> LayerSizes {
    LayerSizes::new(v.to_vec()).unwrap()
}

pub fn iid_stack(layer_sizes: &[usize], seed: u64) -> ChannelStack {
    sample_iid_channels(&sizes(layer_sizes), 1.0, &mut rng_from_seed(seed))
}

pub fn rician_stack(layer_sizes: &[usize], k_factor: f64, seed: u64) -> ChannelStack {
    let g = build_grid_geometry(sizes(layer_sizes), 100.0, 10.0, 2e9).unwrap();
    sample_channels(&g, &FadingSpec::Rician { k_factor }, seed).unwrap()
}

/// Random layer sizes with `n <= max_layers`, `m_i <= max_size`.
pub fn random_sizes(rng: &mut impl Rng, max_layers: usize, max_size: usize) -> Vec<usize> {
    let n = rng.random_range(1..=max_layers);
    (0..n).map(|_| rng.random_range(1..=max_size)).collect()
}

pub fn random_set(rng: &mut impl Rng, m: usize) -> ActivationSet {
    let beta = rng.random_range(0.2..3.0);
    match rng.random_range(0..4) {
        0 => ActivationSet::Ball2 { beta },
        1 => ActivationSet::BallInf { beta },
        2 => ActivationSet::AtMostK {
            beta,
            k: rng.random_range(1..=m.max(1)),
        },
        _ => ActivationSet::SelectOne { beta },
    }
}

pub fn random_profile(rng: &mut impl Rng, layer_sizes: &[usize]) -> AmplificationProfile {
    AmplificationProfile::new(
        layer_sizes
            .iter()
            .map(|&m| (0..m).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect(),
    )
    .unwrap()
}

pub fn start(policy: &ActivationPolicy, layer_sizes: &[usize], seed: u64) -> AmplificationProfile {
    sample_initial_profile(policy, &sizes(layer_sizes), seed).unwrap()
}

fn diag(alpha: &[f64]) -> Array2<Complex64> {
    let mut d = Array2::zeros((alpha.len(), alpha.len()));
    for (j, &a) in alpha.iter().enumerate() {
        d[[j, j]] = Complex64::new(a, 0.0);
    }
    d
}

/// Dense `H(i,0)` for 0-based layer `i`: `H[i] D_{i-1} ⋯ D_0 H[0]`.
pub fn dense_forward(
    stack: &ChannelStack,
    profile: &AmplificationProfile,
    layer: usize,
) -> Vec<Complex64> {
    let mut m = stack.hop(0).clone();
    for k in 1..=layer {
        m = stack.hop(k).dot(&diag(profile.layer(k - 1)).dot(&m));
    }
    m.column(0).to_vec()
}

/// Dense row from layer `i` to the user, excluding layer `i`'s gains.
pub fn dense_backward(
    stack: &ChannelStack,
    profile: &AmplificationProfile,
    layer: usize,
) -> Vec<Complex64> {
    let n = stack.layers();
    let mut m = stack.hop(n).clone();
    for k in (layer + 1..n).rev() {
        m = m.dot(&diag(profile.layer(k))).dot(stack.hop(k));
    }
    m.row(0).to_vec()
}

pub fn rel_close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

/// Every one-repeater-per-layer path, magnitude multiplied in hop order.
/// Returns the first strict maximum in lexicographic order.
pub fn best_path_by_enumeration(stack: &ChannelStack, betas: &[f64]) -> (Vec<usize>, f64) {
    let layer_sizes = stack.layer_sizes().as_slice().to_vec();
    let n = layer_sizes.len();
    let mut idx = vec![0usize; n];
    let mut best = (idx.clone(), f64::NEG_INFINITY);
    loop {
        let mut v = stack.hop(0)[[idx[0], 0]].norm();
        for k in 1..n {
            v *= stack.hop(k)[[idx[k], idx[k - 1]]].norm();
        }
        v *= stack.hop(n)[[0, idx[n - 1]]].norm();
        for b in betas {
            v *= b;
        }
        if v > best.1 {
            best = (idx.clone(), v);
        }
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < layer_sizes[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}
