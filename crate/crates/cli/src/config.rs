//! Scenario configuration files (JSON).

use std::fmt;
use std::path::Path;

use polarnet_core::{ActivationPolicy, ActivationSet, FadingSpec, LayerSizes, NoiseModel};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn default_beta() -> f64 {
    1.0
}

fn default_sigma() -> f64 {
    1.0
}

fn default_bound_samples() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub layer_sizes: Vec<usize>,
    pub channel: ChannelConfig,
    pub policies: Vec<PolicyConfig>,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub experiments: usize,
    pub outer_passes: usize,
    pub root_seed: u64,
    /// Policy id whose final objective is 1.0 in every experiment.
    pub normalization_reference: String,
    /// Monte Carlo draws per distribution for the expected-SNR comparison
    /// (IID channels only).
    #[serde(default = "default_bound_samples")]
    pub bound_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelConfig {
    /// Repeaters on a regular grid, Rician fading with free-space path loss.
    RicianGrid {
        interlayer_spacing: f64,
        intralayer_spacing: f64,
        carrier_frequency: f64,
        k_factor: f64,
    },
    /// IID `CN(0, σ_H²)` entries, no geometry.
    IidGaussian { sigma_h: f64 },
}

impl ChannelConfig {
    pub fn fading(&self) -> FadingSpec {
        match *self {
            Self::RicianGrid { k_factor, .. } => FadingSpec::Rician { k_factor },
            Self::IidGaussian { sigma_h } => FadingSpec::IidGaussian { sigma_h },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Ball2,
    BallInf,
    AtMostK,
    SelectOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub id: String,
    pub kind: PolicyKind,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl PolicyConfig {
    pub fn set(&self) -> ActivationSet {
        let beta = self.beta;
        match self.kind {
            PolicyKind::Ball2 => ActivationSet::Ball2 { beta },
            PolicyKind::BallInf => ActivationSet::BallInf { beta },
            PolicyKind::AtMostK => ActivationSet::AtMostK {
                beta,
                k: self.k.unwrap_or(0),
            },
            PolicyKind::SelectOne => ActivationSet::SelectOne { beta },
        }
    }

    pub fn policy(&self, layers: usize) -> ActivationPolicy {
        ActivationPolicy::uniform(self.set(), layers).expect("validated policy")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Standard deviation used at every node unless `sigmas` is given.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Per-node values `σ_0 … σ_{n+1}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<Vec<f64>>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma: default_sigma(),
            sigmas: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

/// Every problem found in a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<FieldError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}", e.field, e.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
            path: path.to_path_buf(),
            source,
        })?;
        let config = Self::from_json(&text).map_err(|e| CliError::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn layers(&self) -> usize {
        self.layer_sizes.len()
    }

    pub fn sizes(&self) -> LayerSizes {
        LayerSizes::new(self.layer_sizes.clone()).expect("validated layer sizes")
    }

    pub fn noise_model(&self) -> NoiseModel {
        match &self.noise.sigmas {
            Some(s) => NoiseModel::new(s.clone()),
            None => NoiseModel::uniform(self.noise.sigma, self.layers()),
        }
        .expect("validated noise")
    }

    pub fn reference_index(&self) -> usize {
        self.policies
            .iter()
            .position(|p| p.id == self.normalization_reference)
            .expect("validated reference")
    }

    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut errors = Vec::new();
        let mut fail = |field: &str, message: String| {
            errors.push(FieldError {
                field: field.to_string(),
                message,
            })
        };

        if self.layer_sizes.is_empty() {
            fail("layer_sizes", "need at least one repeater layer".into());
        }
        if let Some(i) = self.layer_sizes.iter().position(|&m| m == 0) {
            fail(
                &format!("layer_sizes[{i}]"),
                "layers must not be empty".into(),
            );
        }
        match self.channel {
            ChannelConfig::RicianGrid {
                interlayer_spacing,
                intralayer_spacing,
                carrier_frequency,
                k_factor,
            } => {
                for (name, value) in [
                    ("interlayer_spacing", interlayer_spacing),
                    ("intralayer_spacing", intralayer_spacing),
                    ("carrier_frequency", carrier_frequency),
                ] {
                    if !positive(value) {
                        fail(
                            &format!("channel.{name}"),
                            format!("must be positive, got {value}"),
                        );
                    }
                }
                if k_factor.is_nan() || k_factor < 0.0 {
                    fail(
                        "channel.k_factor",
                        format!("must be non-negative, got {k_factor}"),
                    );
                }
            }
            ChannelConfig::IidGaussian { sigma_h } => {
                if !positive(sigma_h) {
                    fail(
                        "channel.sigma_h",
                        format!("must be positive, got {sigma_h}"),
                    );
                }
            }
        }

        if self.policies.is_empty() {
            fail("policies", "need at least one policy".into());
        }
        for (i, p) in self.policies.iter().enumerate() {
            if !valid_id(&p.id) {
                fail(
                    &format!("policies[{i}].id"),
                    format!(
                        "{:?} must be non-empty and use only letters, digits, '_' or '-'",
                        p.id
                    ),
                );
            }
            if self.policies[..i].iter().any(|q| q.id == p.id) {
                fail(
                    &format!("policies[{i}].id"),
                    format!("duplicate id {:?}", p.id),
                );
            }
            if !positive(p.beta) {
                fail(
                    &format!("policies[{i}].beta"),
                    format!("must be positive, got {}", p.beta),
                );
            }
            match (p.kind, p.k) {
                (PolicyKind::AtMostK, None) => {
                    fail(&format!("policies[{i}].k"), "required for at_most_k".into())
                }
                (PolicyKind::AtMostK, Some(0)) => {
                    fail(&format!("policies[{i}].k"), "must be at least 1".into())
                }
                (PolicyKind::AtMostK, Some(_)) | (_, None) => {}
                (_, Some(_)) => fail(
                    &format!("policies[{i}].k"),
                    "only at_most_k policies take k".into(),
                ),
            }
        }
        if !self
            .policies
            .iter()
            .any(|p| p.id == self.normalization_reference)
        {
            fail(
                "normalization_reference",
                format!(
                    "{:?} is not a listed policy id",
                    self.normalization_reference
                ),
            );
        }

        let n = self.layer_sizes.len();
        match &self.noise.sigmas {
            Some(s) => {
                if s.len() != n + 2 {
                    fail(
                        "noise.sigmas",
                        format!(
                            "need {} values (base station, {n} layers, user), got {}",
                            n + 2,
                            s.len()
                        ),
                    );
                } else if let Some(x) = s.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
                    fail(
                        "noise.sigmas",
                        format!("values must be non-negative, got {x}"),
                    );
                } else if !(s[0] > 0.0 && s[n + 1] > 0.0) {
                    fail(
                        "noise.sigmas",
                        "base station and user noise must be positive".into(),
                    );
                }
            }
            None => {
                if !positive(self.noise.sigma) {
                    fail(
                        "noise.sigma",
                        format!("must be positive, got {}", self.noise.sigma),
                    );
                }
            }
        }

        if self.experiments == 0 {
            fail("experiments", "must be at least 1".into());
        }
        if self.outer_passes == 0 {
            fail("outer_passes", "must be at least 1".into());
        }
        if self.bound_samples == 0 {
            fail("bound_samples", "must be at least 1".into());
        }

        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(errors))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "t",
        "layer_sizes": [2, 3],
        "channel": {"kind": "iid_gaussian", "sigma_h": 1.0},
        "policies": [{"id": "a", "kind": "ball2"}],
        "experiments": 3,
        "outer_passes": 2,
        "root_seed": 7,
        "normalization_reference": "a"
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = ScenarioConfig::from_json(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.policies[0].beta, 1.0);
        assert_eq!(c.noise, NoiseConfig::default());
        assert_eq!(c.bound_samples, 10_000);
        assert_eq!(c.noise_model().sigmas(), &[1.0; 4]);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = MINIMAL.replace("\"root_seed\"", "\"rootseed\": 1, \"root_seed\"");
        assert!(ScenarioConfig::from_json(&text).is_err());
        let text = MINIMAL.replace("\"sigma_h\": 1.0", "\"sigma_h\": 1.0, \"k_factor\": 2");
        assert!(ScenarioConfig::from_json(&text).is_err());
    }

    #[test]
    fn reports_every_bad_field() {
        let mut c = ScenarioConfig::from_json(MINIMAL).unwrap();
        c.experiments = 0;
        c.outer_passes = 0;
        c.normalization_reference = "missing".into();
        c.policies.push(PolicyConfig {
            id: "bad id".into(),
            kind: PolicyKind::AtMostK,
            beta: -1.0,
            k: None,
        });
        let fields: Vec<String> = c
            .validate()
            .unwrap_err()
            .0
            .into_iter()
            .map(|e| e.field)
            .collect();
        for f in [
            "experiments",
            "outer_passes",
            "normalization_reference",
            "policies[1].id",
            "policies[1].beta",
            "policies[1].k",
        ] {
            assert!(fields.iter().any(|x| x == f), "{f} missing from {fields:?}");
        }
    }

    #[test]
    fn noise_vector_length_is_checked() {
        let mut c = ScenarioConfig::from_json(MINIMAL).unwrap();
        c.noise.sigmas = Some(vec![1.0, 1.0]);
        assert_eq!(c.validate().unwrap_err().0[0].field, "noise.sigmas");
        c.noise.sigmas = Some(vec![1.0, 0.0, 0.0, 2.0]);
        c.validate().unwrap();
    }

    #[test]
    fn k_only_for_at_most_k() {
        let mut c = ScenarioConfig::from_json(MINIMAL).unwrap();
        c.policies[0].k = Some(2);
        assert_eq!(c.validate().unwrap_err().0[0].field, "policies[0].k");
    }
}
