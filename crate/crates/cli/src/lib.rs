//! Configuration-driven experiments for layered repeater power control:
//! seeded batch runs, per-iteration statistics and CSV/JSON plot data.

pub mod config;
pub mod error;
pub mod report;
pub mod scenario;
pub mod stats;

pub use config::{ChannelConfig, NoiseConfig, PolicyConfig, PolicyKind, ScenarioConfig};
pub use error::CliError;
pub use report::{emit_report, OutputFormat};
pub use scenario::{run_scenario, ScenarioReport};
pub use stats::{aggregate_statistics, StatsSeries};
