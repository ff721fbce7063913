//! Batch experiments.
//!
//! Each experiment draws one channel realization that every policy shares,
//! runs every policy from its own random start and normalizes all traces by
//! the reference policy's final objective in that experiment. Experiments
//! run in parallel but are merged in index order, so the report does not
//! depend on the number of workers.

use polarnet_core::channel::sample_iid_channels;
use polarnet_core::oracles::dag_select_one_optimum;
use polarnet_core::rng::{derive_seed, rng_from_seed, CHANNEL_STREAM, INIT_STREAM};
use polarnet_core::snr::{
    expected_snr_upper_bound, monte_carlo_channel_power, monte_carlo_snr, snr, MonteCarloEstimate,
    RandomAlphaDistribution,
};
use polarnet_core::{
    build_grid_geometry, run_polarnet, sample_channels, sample_initial_profile, ActivationSet,
    ChannelStack, ConvergenceCriterion, NetworkGeometry,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ChannelConfig, ScenarioConfig};
use crate::error::CliError;
use crate::stats::{aggregate_statistics, mean, StatsSeries};

/// Environment variable holding the number of worker threads.
pub const WORKERS_ENV: &str = "POLARNET_WORKERS";
/// Seed purpose for the expected-SNR Monte Carlo runs.
pub const BOUND_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub root_seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation, 0 for a single value.
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mu = mean(values);
        let std_dev = if values.len() > 1 {
            (values.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (values.len() - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        Self {
            mean: mu,
            std_dev,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub id: String,
    pub set: ActivationSet,
    /// Normalized objective per inner iteration.
    pub series: StatsSeries,
    /// Final `|h_tot|²`.
    pub final_objective: Summary,
    pub final_normalized: Summary,
    /// Final `|h_tot|²` over the select-one optimum of the same realization.
    pub ratio_to_dag: Summary,
    pub snr_dl: Summary,
    pub snr_ul: Summary,
    /// Final `|h_tot|² / σ²` with `σ = min(σ_0, σ_{n+1})`.
    pub power_over_noise_floor: Summary,
    /// Random-gain distribution this policy is compared against, for IID
    /// channels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_distribution: Option<RandomAlphaDistribution>,
    /// Experiments whose trace never decreased beyond the monotonicity slack.
    pub monotone_experiments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagComparison {
    pub betas: Vec<f64>,
    /// Optimal single-repeater-per-layer `|h_tot|²`.
    pub optimum_power: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub distribution: RandomAlphaDistribution,
    /// Closed-form bound on the expected SNR.
    pub formula_bound: f64,
    pub snr_dl: MonteCarloEstimate,
    pub snr_ul: MonteCarloEstimate,
    /// Monte Carlo `E|h_tot|² / σ²`.
    pub channel_power_over_noise_floor: MonteCarloEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub sigma: f64,
    pub sigma_h: f64,
    pub entries: Vec<BoundEntry>,
}

impl BoundComparison {
    pub fn entry(&self, dist: RandomAlphaDistribution) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.distribution == dist)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub provenance: Provenance,
    pub layer_sizes: Vec<usize>,
    pub experiments: usize,
    pub outer_passes: usize,
    pub normalization_reference: String,
    pub policies: Vec<PolicyReport>,
    pub dag: DagComparison,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundComparison>,
}

impl ScenarioReport {
    pub fn policy(&self, id: &str) -> Option<&PolicyReport> {
        self.policies.iter().find(|p| p.id == id)
    }
}

/// Random-gain distribution matching an activation set, if any.
pub fn bound_distribution(set: &ActivationSet) -> Option<RandomAlphaDistribution> {
    match set {
        ActivationSet::Ball2 { .. } => Some(RandomAlphaDistribution::UniformSphereOrthant),
        ActivationSet::SelectOne { .. } => Some(RandomAlphaDistribution::UniformOneHot),
        ActivationSet::BallInf { .. } => Some(RandomAlphaDistribution::IidBernoulliHalf),
        ActivationSet::AtMostK { .. } => None,
    }
}

/// Reads the worker count from [`WORKERS_ENV`]. `None` means one per core.
pub fn workers_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Workers(format!(
                "{WORKERS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

pub fn config_hash(config: &ScenarioConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

enum ChannelSource {
    Grid(NetworkGeometry, polarnet_core::FadingSpec),
    Iid(polarnet_core::LayerSizes, f64),
}

impl ChannelSource {
    fn sample(&self, seed: u64) -> polarnet_core::Result<ChannelStack> {
        match self {
            Self::Grid(g, fading) => sample_channels(g, fading, seed),
            Self::Iid(sizes, sigma_h) => Ok(sample_iid_channels(
                sizes,
                *sigma_h,
                &mut rng_from_seed(seed),
            )),
        }
    }
}

struct PolicyOutcome {
    trace: Vec<f64>,
    snr_dl: f64,
    snr_ul: f64,
    monotone: bool,
}

struct Experiment {
    policies: Vec<PolicyOutcome>,
    dag_power: f64,
}

fn run_experiment(
    config: &ScenarioConfig,
    source: &ChannelSource,
    dag_betas: &[f64],
    index: usize,
) -> Result<Experiment, CliError> {
    let sizes = config.sizes();
    let noise = config.noise_model();
    let criterion = ConvergenceCriterion::passes(config.outer_passes);
    let stack = source.sample(derive_seed(config.root_seed, index as u64, CHANNEL_STREAM))?;
    let mut policies = Vec::with_capacity(config.policies.len());
    for (p, pc) in config.policies.iter().enumerate() {
        let policy = pc.policy(config.layers());
        let seed = derive_seed(config.root_seed, index as u64, INIT_STREAM + p as u64);
        let init = sample_initial_profile(&policy, &sizes, seed)?;
        let run = run_polarnet(&stack, &policy, &init, &criterion)?;
        let report = snr(&stack, &run.final_profile, &noise)?;
        policies.push(PolicyOutcome {
            monotone: run.is_monotone(),
            trace: run.objective_trace,
            snr_dl: report.snr_dl,
            snr_ul: report.snr_ul,
        });
    }
    let dag = dag_select_one_optimum(&stack, dag_betas)?;
    Ok(Experiment {
        policies,
        dag_power: dag.objective * dag.objective,
    })
}

fn bounds(config: &ScenarioConfig, sigma_h: f64) -> Result<BoundComparison, CliError> {
    let sizes = config.sizes();
    let noise = config.noise_model();
    let sigma = noise.terminal_floor();
    let entries = RandomAlphaDistribution::ALL
        .par_iter()
        .enumerate()
        .map(|(d, &dist)| {
            let seed = derive_seed(config.root_seed, d as u64, BOUND_STREAM);
            let est = monte_carlo_snr(&sizes, sigma_h, &noise, dist, config.bound_samples, seed)?;
            let power =
                monte_carlo_channel_power(&sizes, sigma_h, dist, config.bound_samples, seed)?;
            let s2 = sigma * sigma;
            Ok(BoundEntry {
                distribution: dist,
                formula_bound: expected_snr_upper_bound(&sizes, sigma_h, sigma, dist)?,
                snr_dl: est.dl,
                snr_ul: est.ul,
                channel_power_over_noise_floor: MonteCarloEstimate {
                    mean: power.mean / s2,
                    std_error: power.std_error / s2,
                    samples: power.samples,
                },
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(BoundComparison {
        sigma,
        sigma_h,
        entries,
    })
}

/// Runs every experiment of a validated config.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport, CliError> {
    config.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers_from_env()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Workers(e.to_string()))?;
    pool.install(|| run_in_pool(config))
}

fn run_in_pool(config: &ScenarioConfig) -> Result<ScenarioReport, CliError> {
    let sizes = config.sizes();
    let n = config.layers();
    let source = match config.channel {
        ChannelConfig::RicianGrid {
            interlayer_spacing,
            intralayer_spacing,
            carrier_frequency,
            ..
        } => ChannelSource::Grid(
            build_grid_geometry(
                sizes.clone(),
                interlayer_spacing,
                intralayer_spacing,
                carrier_frequency,
            )?,
            config.channel.fading(),
        ),
        ChannelConfig::IidGaussian { sigma_h } => ChannelSource::Iid(sizes.clone(), sigma_h),
    };
    let dag_betas = match config
        .policies
        .iter()
        .find(|p| matches!(p.set(), ActivationSet::SelectOne { .. }))
    {
        Some(p) => vec![p.beta; n],
        None => vec![1.0; n],
    };

    let experiments = (0..config.experiments)
        .into_par_iter()
        .map(|e| run_experiment(config, &source, &dag_betas, e))
        .collect::<Result<Vec<_>, CliError>>()?;

    let reference = config.reference_index();
    let noise_floor = config.noise_model().terminal_floor().powi(2);
    let iid = matches!(config.channel, ChannelConfig::IidGaussian { .. });
    let dag_power: Vec<f64> = experiments.iter().map(|x| x.dag_power).collect();

    let mut policies = Vec::with_capacity(config.policies.len());
    for (p, pc) in config.policies.iter().enumerate() {
        let outcomes: Vec<&PolicyOutcome> = experiments.iter().map(|x| &x.policies[p]).collect();
        let finals: Vec<f64> = outcomes
            .iter()
            .map(|o| *o.trace.last().expect("non-empty trace"))
            .collect();
        let normalized: Vec<Vec<f64>> = experiments
            .iter()
            .map(|x| {
                let scale = *x.policies[reference].trace.last().expect("non-empty trace");
                x.policies[p].trace.iter().map(|v| v / scale).collect()
            })
            .collect();
        let final_normalized: Vec<f64> = normalized
            .iter()
            .map(|t| *t.last().expect("non-empty trace"))
            .collect();
        let ratios: Vec<f64> = finals.iter().zip(&dag_power).map(|(f, d)| f / d).collect();
        let collect =
            |f: fn(&PolicyOutcome) -> f64| -> Vec<f64> { outcomes.iter().map(|o| f(o)).collect() };
        let set = pc.set();
        policies.push(PolicyReport {
            id: pc.id.clone(),
            set,
            series: aggregate_statistics(&normalized)?,
            final_objective: Summary::of(&finals),
            final_normalized: Summary::of(&final_normalized),
            ratio_to_dag: Summary::of(&ratios),
            snr_dl: Summary::of(&collect(|o| o.snr_dl)),
            snr_ul: Summary::of(&collect(|o| o.snr_ul)),
            power_over_noise_floor: Summary::of(
                &finals.iter().map(|f| f / noise_floor).collect::<Vec<_>>(),
            ),
            bound_distribution: if iid { bound_distribution(&set) } else { None },
            monotone_experiments: outcomes.iter().filter(|o| o.monotone).count(),
        });
    }

    let bounds = match config.channel {
        ChannelConfig::IidGaussian { sigma_h } => Some(bounds(config, sigma_h)?),
        ChannelConfig::RicianGrid { .. } => None,
    };

    Ok(ScenarioReport {
        name: config.name.clone(),
        provenance: Provenance {
            config_sha256: config_hash(config),
            root_seed: config.root_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        layer_sizes: config.layer_sizes.clone(),
        experiments: config.experiments,
        outer_passes: config.outer_passes,
        normalization_reference: config.normalization_reference.clone(),
        policies,
        dag: DagComparison {
            betas: dag_betas,
            optimum_power: Summary::of(&dag_power),
        },
        bounds,
    })
}
