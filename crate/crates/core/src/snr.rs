//! Noise accumulation, SNR and the expected-SNR bounds for random gains.
//!
//! Noise injected at layer `i` is amplified by that layer and then carried
//! to the receiver by the rest of the cascade. For circularly-symmetric
//! Gaussian noise `E|v·w|² = σ²‖v‖²`, so
//!
//! ```text
//! σ_DL² = Σ_i σ_i² ‖backward_i ∘ α_i‖² + σ_{n+1}²
//! σ_UL² = Σ_i σ_i² ‖α_i ∘ forward_i‖²  + σ_0²
//! ```
//!
//! with `forward`/`backward` the partial products of [`CascadeCache`].

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cascade::{check_profile, total_channel, CascadeCache};
use crate::channel::{sample_iid_channels, ChannelStack};
use crate::error::{PolarError, Result};
use crate::network::LayerSizes;
use crate::profile::AmplificationProfile;
use crate::rng::rng_from_seed;

/// Noise standard deviations `σ_0, σ_1, …, σ_n, σ_{n+1}`: base station,
/// each repeater layer, user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    sigmas: Vec<f64>,
}

impl NoiseModel {
    pub fn new(sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.len() < 3 {
            return Err(PolarError::Domain(format!(
                "noise model needs n + 2 >= 3 entries, got {}",
                sigmas.len()
            )));
        }
        if let Some(s) = sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(PolarError::Domain(format!(
                "noise standard deviations must be non-negative and finite, got {s}"
            )));
        }
        Ok(Self { sigmas })
    }

    /// The same `σ` at every node of an `n`-layer network.
    pub fn uniform(sigma: f64, n: usize) -> Result<Self> {
        Self::new(vec![sigma; n + 2])
    }

    pub fn layers(&self) -> usize {
        self.sigmas.len() - 2
    }

    pub fn base_station(&self) -> f64 {
        self.sigmas[0]
    }

    pub fn user(&self) -> f64 {
        self.sigmas[self.sigmas.len() - 1]
    }

    /// Standard deviation at the 0-based repeater layer `layer`.
    pub fn repeater(&self, layer: usize) -> f64 {
        self.sigmas[layer + 1]
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// `min(σ_0, σ_{n+1})`, the terminal noise floor.
    pub fn terminal_floor(&self) -> f64 {
        self.base_station().min(self.user())
    }

    fn check_layers(&self, n: usize) -> Result<()> {
        if self.layers() != n {
            return Err(PolarError::Dimension(format!(
                "noise model covers {} layers, network has {n}",
                self.layers()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    pub sigma_dl_sq: f64,
    pub sigma_ul_sq: f64,
    pub snr_dl: f64,
    pub snr_ul: f64,
    /// `|h_tot|²`
    pub channel_power: f64,
}

/// Closed-form `(σ_DL², σ_UL²)`.
pub fn noise_variances(
    stack: &ChannelStack,
    profile: &AmplificationProfile,
    noise: &NoiseModel,
) -> Result<(f64, f64)> {
    check_profile(stack, profile)?;
    noise.check_layers(stack.layers())?;
    let cache = CascadeCache::build(stack, profile)?;
    let weighted_norm = |v: &[crate::Complex64], alpha: &[f64]| -> f64 {
        v.iter().zip(alpha).map(|(z, a)| z.norm_sqr() * a * a).sum()
    };
    let mut dl = noise.user().powi(2);
    let mut ul = noise.base_station().powi(2);
    for i in 0..stack.layers() {
        let s2 = noise.repeater(i).powi(2);
        let alpha = profile.layer(i);
        let backward = cache.backward(i).expect("built cache is clean");
        let forward = cache.forward(i).expect("built cache is clean");
        dl += s2 * weighted_norm(backward, alpha);
        ul += s2 * weighted_norm(forward, alpha);
    }
    Ok((dl, ul))
}

pub fn snr(
    stack: &ChannelStack,
    profile: &AmplificationProfile,
    noise: &NoiseModel,
) -> Result<SnrReport> {
    let (sigma_dl_sq, sigma_ul_sq) = noise_variances(stack, profile, noise)?;
    if sigma_dl_sq == 0.0 || sigma_ul_sq == 0.0 {
        return Err(PolarError::InfiniteSnr(format!(
            "noise variance is zero (DL {sigma_dl_sq}, UL {sigma_ul_sq})"
        )));
    }
    let channel_power = total_channel(stack, profile)?.norm_sqr();
    Ok(SnrReport {
        sigma_dl_sq,
        sigma_ul_sq,
        snr_dl: channel_power / sigma_dl_sq,
        snr_ul: channel_power / sigma_ul_sq,
        channel_power,
    })
}

/// Random gain distributions used for the expected-SNR bounds. All use unit
/// levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomAlphaDistribution {
    /// Uniform on the non-negative orthant of the unit sphere.
    UniformSphereOrthant,
    /// A uniformly placed single 1.
    UniformOneHot,
    /// Each entry 0 or 1 with probability one half.
    IidBernoulliHalf,
}

impl RandomAlphaDistribution {
    pub const ALL: [Self; 3] = [
        Self::UniformSphereOrthant,
        Self::UniformOneHot,
        Self::IidBernoulliHalf,
    ];

    pub fn sample<R: Rng + ?Sized>(&self, sizes: &LayerSizes, rng: &mut R) -> AmplificationProfile {
        let alphas = sizes
            .as_slice()
            .iter()
            .map(|&m| match self {
                Self::UniformSphereOrthant => loop {
                    let v: Vec<f64> = (0..m)
                        .map(|_| rng.sample::<f64, _>(StandardNormal).abs())
                        .collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        break v.into_iter().map(|x| x / norm).collect();
                    }
                },
                Self::UniformOneHot => {
                    let mut v = vec![0.0; m];
                    v[rng.random_range(0..m)] = 1.0;
                    v
                }
                Self::IidBernoulliHalf => (0..m)
                    .map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 })
                    .collect(),
            })
            .collect();
        AmplificationProfile::new(alphas).expect("sampled gains are valid")
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::UniformSphereOrthant => "uniform_sphere_orthant",
            Self::UniformOneHot => "uniform_one_hot",
            Self::IidBernoulliHalf => "iid_bernoulli_half",
        }
    }
}

/// Closed-form bounds on the expected SNR under IID `CN(0, σ_H²)` channels:
/// `σ_H^{n+1} / σ²` for the sphere and one-hot distributions and
/// `(m_1⋯m_n) σ_H^{n+1} / (4ⁿ σ²)` for the Bernoulli one.
///
/// These are kept in their established form. Averaging the path sum
/// directly gives `E|h_tot|² = σ_H^{2(n+1)}` and
/// `(m_1⋯m_n) σ_H^{2(n+1)} / 2ⁿ` instead, so the Bernoulli expression sits
/// below the true `E|h_tot|²/σ²`. Report it next to
/// [`monte_carlo_channel_power`].
pub fn expected_snr_upper_bound(
    sizes: &LayerSizes,
    sigma_h: f64,
    sigma: f64,
    dist: RandomAlphaDistribution,
) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) || !(sigma_h > 0.0 && sigma_h.is_finite()) {
        return Err(PolarError::Domain(format!(
            "bound needs positive sigma and sigma_h, got {sigma} and {sigma_h}"
        )));
    }
    let n = sizes.layers() as i32;
    let base = sigma_h.powi(n + 1) / (sigma * sigma);
    Ok(match dist {
        RandomAlphaDistribution::UniformSphereOrthant | RandomAlphaDistribution::UniformOneHot => {
            base
        }
        RandomAlphaDistribution::IidBernoulliHalf => {
            let product: f64 = sizes.as_slice().iter().map(|&m| m as f64).product();
            product * base / 4f64.powi(n)
        }
    })
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    /// Zero for a single sample.
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Debug, Default)]
struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn finish(&self) -> MonteCarloEstimate {
        let std_error = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
        } else {
            0.0
        };
        MonteCarloEstimate {
            mean: self.mean,
            std_error,
            samples: self.count,
        }
    }
}

fn check_samples(samples: usize, sigma_h: f64) -> Result<()> {
    if samples == 0 {
        return Err(PolarError::Domain("need at least one sample".into()));
    }
    if !(sigma_h > 0.0 && sigma_h.is_finite()) {
        return Err(PolarError::Domain(format!(
            "channel standard deviation must be positive, got {sigma_h}"
        )));
    }
    Ok(())
}

/// Estimates `E|h_tot|²` over IID `CN(0, σ_H²)` channels and random gains.
pub fn monte_carlo_channel_power(
    sizes: &LayerSizes,
    sigma_h: f64,
    dist: RandomAlphaDistribution,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_samples(samples, sigma_h)?;
    let mut rng = rng_from_seed(seed);
    let mut acc = Welford::default();
    for _ in 0..samples {
        let stack = sample_iid_channels(sizes, sigma_h, &mut rng);
        let profile = dist.sample(sizes, &mut rng);
        acc.push(total_channel(&stack, &profile)?.norm_sqr());
    }
    Ok(acc.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrEstimate {
    pub dl: MonteCarloEstimate,
    pub ul: MonteCarloEstimate,
}

/// Estimates `E(SNR_DL)` and `E(SNR_UL)` over IID channels and random gains.
pub fn monte_carlo_snr(
    sizes: &LayerSizes,
    sigma_h: f64,
    noise: &NoiseModel,
    dist: RandomAlphaDistribution,
    samples: usize,
    seed: u64,
) -> Result<SnrEstimate> {
    check_samples(samples, sigma_h)?;
    noise.check_layers(sizes.layers())?;
    let mut rng = rng_from_seed(seed);
    let (mut dl, mut ul) = (Welford::default(), Welford::default());
    for _ in 0..samples {
        let stack = sample_iid_channels(sizes, sigma_h, &mut rng);
        let profile = dist.sample(sizes, &mut rng);
        let report = snr(&stack, &profile, noise)?;
        dl.push(report.snr_dl);
        ul.push(report.snr_ul);
    }
    Ok(SnrEstimate {
        dl: dl.finish(),
        ul: ul.finish(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;
    use ndarray::array;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sizes(v: &[usize]) -> LayerSizes {
        LayerSizes::new(v.to_vec()).unwrap()
    }

    #[test]
    fn unit_chain_variances() {
        let stack = ChannelStack::new(vec![array![[c(1.0)]], array![[c(1.0)]]]).unwrap();
        let p = AmplificationProfile::new(vec![vec![1.0]]).unwrap();
        let noise = NoiseModel::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(noise_variances(&stack, &p, &noise).unwrap(), (2.0, 2.0));
    }

    #[test]
    fn silent_repeaters_leave_terminal_noise() {
        let mut rng = rng_from_seed(1);
        let s = sizes(&[3, 4]);
        let stack = sample_iid_channels(&s, 1.0, &mut rng);
        let p = AmplificationProfile::constant(&s, 0.0).unwrap();
        let noise = NoiseModel::new(vec![0.5, 2.0, 3.0, 0.25]).unwrap();
        assert_eq!(noise_variances(&stack, &p, &noise).unwrap(), (0.0625, 0.25));
        let report = snr(&stack, &p, &noise).unwrap();
        assert_eq!(report.snr_dl, 0.0);
    }

    #[test]
    fn symmetric_chain_has_equal_snr() {
        let stack =
            ChannelStack::new(vec![array![[c(0.5)]], array![[c(2.0)]], array![[c(0.5)]]]).unwrap();
        let p = AmplificationProfile::new(vec![vec![0.8], vec![0.8]]).unwrap();
        let noise = NoiseModel::uniform(0.3, 2).unwrap();
        let r = snr(&stack, &p, &noise).unwrap();
        assert!((r.snr_dl - r.snr_ul).abs() <= 1e-14 * r.snr_dl);
    }

    #[test]
    fn snr_below_terminal_floor_bound() {
        for seed in 0..20 {
            let mut rng = rng_from_seed(seed);
            let s = sizes(&[3, 2, 4]);
            let stack = sample_iid_channels(&s, 1.0, &mut rng);
            let p = RandomAlphaDistribution::UniformSphereOrthant.sample(&s, &mut rng);
            let noise = NoiseModel::new(vec![0.7, 0.2, 0.4, 0.3, 1.1]).unwrap();
            let r = snr(&stack, &p, &noise).unwrap();
            let bound = r.channel_power / noise.terminal_floor().powi(2);
            assert!(r.snr_dl <= bound && r.snr_ul <= bound);
            assert!(r.sigma_dl_sq >= noise.user().powi(2));
            assert!(r.sigma_ul_sq >= noise.base_station().powi(2));
        }
    }

    #[test]
    fn zero_noise_is_an_error() {
        let stack = ChannelStack::new(vec![array![[c(1.0)]], array![[c(1.0)]]]).unwrap();
        let p = AmplificationProfile::new(vec![vec![1.0]]).unwrap();
        let noise = NoiseModel::uniform(0.0, 1).unwrap();
        assert!(matches!(
            snr(&stack, &p, &noise),
            Err(PolarError::InfiniteSnr(_))
        ));
    }

    #[test]
    fn noise_model_validation() {
        assert!(NoiseModel::new(vec![1.0, 1.0]).is_err());
        assert!(NoiseModel::new(vec![1.0, -1.0, 1.0]).is_err());
        let stack = ChannelStack::new(vec![array![[c(1.0)]], array![[c(1.0)]]]).unwrap();
        let p = AmplificationProfile::new(vec![vec![1.0]]).unwrap();
        let wrong = NoiseModel::uniform(1.0, 2).unwrap();
        assert!(matches!(
            noise_variances(&stack, &p, &wrong),
            Err(PolarError::Dimension(_))
        ));
    }

    #[test]
    fn published_bounds() {
        let b = expected_snr_upper_bound(
            &sizes(&[1]),
            1.0,
            1.0,
            RandomAlphaDistribution::UniformSphereOrthant,
        )
        .unwrap();
        assert_eq!(b, 1.0);
        let b = expected_snr_upper_bound(
            &sizes(&[3, 5]),
            1.0,
            1.0,
            RandomAlphaDistribution::IidBernoulliHalf,
        )
        .unwrap();
        assert_eq!(b, 15.0 / 16.0);
        let b = expected_snr_upper_bound(
            &sizes(&[3, 5]),
            2.0,
            0.5,
            RandomAlphaDistribution::UniformOneHot,
        )
        .unwrap();
        assert_eq!(b, 8.0 / 0.25);
        assert!(expected_snr_upper_bound(
            &sizes(&[1]),
            1.0,
            0.0,
            RandomAlphaDistribution::UniformOneHot
        )
        .is_err());
    }

    #[test]
    fn sampled_gains_follow_their_distribution() {
        let s = sizes(&[4, 7]);
        let mut rng = rng_from_seed(8);
        for _ in 0..50 {
            let p = RandomAlphaDistribution::UniformSphereOrthant.sample(&s, &mut rng);
            for a in p.layers_iter() {
                assert!((a.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            }
            let p = RandomAlphaDistribution::UniformOneHot.sample(&s, &mut rng);
            for a in p.layers_iter() {
                assert_eq!(a.iter().sum::<f64>(), 1.0);
                assert_eq!(a.iter().filter(|&&x| x == 1.0).count(), 1);
            }
            let p = RandomAlphaDistribution::IidBernoulliHalf.sample(&s, &mut rng);
            assert!(p.layers_iter().flatten().all(|&x| x == 0.0 || x == 1.0));
        }
    }

    #[test]
    fn monte_carlo_is_deterministic_and_needs_samples() {
        let s = sizes(&[2, 2]);
        let d = RandomAlphaDistribution::UniformOneHot;
        assert_eq!(
            monte_carlo_channel_power(&s, 1.0, d, 100, 5).unwrap(),
            monte_carlo_channel_power(&s, 1.0, d, 100, 5).unwrap()
        );
        assert!(monte_carlo_channel_power(&s, 1.0, d, 0, 5).is_err());
        assert_eq!(
            monte_carlo_channel_power(&s, 1.0, d, 1, 5)
                .unwrap()
                .std_error,
            0.0
        );
    }
}
