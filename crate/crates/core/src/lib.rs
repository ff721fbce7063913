//! Power control for multi-layer amplify-and-forward repeater networks.
//!
//! A base station reaches a single user through `n` layers of repeaters.
//! Each repeater scales what it hears by a non-negative gain, so the
//! end-to-end channel is the cascade
//!
//! ```text
//! h_tot = H[n+1,n] · D_n · H[n,n-1] · … · D_1 · H[1,0],   D_i = diag(α_i)
//! ```
//!
//! The optimizer in [`optimizer`] maximizes `|h_tot|²` one layer at a time,
//! each step solving a linear maximization over that layer's activation set
//! ([`activation`]). Every step is monotone in the objective. The
//! per-layer observation rows are maintained incrementally by
//! [`cascade::CascadeCache`] while the layers are swept forwards and
//! backwards.
//!
//! [`snr`] has the closed-form noise accumulation and SNR bounds, and
//! [`oracles`] holds the exact solvers and the symbol-level simulator the
//! rest of the crate is validated against.

pub mod activation;
pub mod cascade;
pub mod channel;
pub mod error;
pub mod network;
pub mod optimizer;
pub mod oracles;
pub mod profile;
pub mod rng;
pub mod snr;

pub use activation::{ActivationPolicy, ActivationSet};
pub use cascade::{total_channel, CascadeCache};
pub use channel::{sample_channels, ChannelStack, FadingSpec};
pub use error::{PolarError, Result};
pub use network::{build_grid_geometry, free_space_gain, LayerSizes, NetworkGeometry, Point};
pub use optimizer::{run_polarnet, ConvergenceCriterion, RunRecord, TerminationReason};
pub use profile::{sample_initial_profile, AmplificationProfile};
pub use snr::{NoiseModel, RandomAlphaDistribution, SnrReport};

pub use num_complex::Complex64;
