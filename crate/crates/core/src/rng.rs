//! Seed derivation.
//!
//! Every random quantity in an experiment is drawn from its own ChaCha8
//! stream. Streams are addressed by `(root seed, index, purpose)`, where
//! `index` is usually the experiment number and `purpose` separates the
//! channel draw from the per-policy initializations. The experiment seed is
//! `root + index` (wrapping), and each purpose is mixed in with SplitMix64,
//! so a stream does not depend on how many other streams were consumed or
//! in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream used for the channel realization of an experiment.
pub const CHANNEL_STREAM: u64 = 0;
/// First stream used for initial profiles; policy `p` uses `INIT_STREAM + p`.
pub const INIT_STREAM: u64 = 1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(root: u64, index: u64, purpose: u64) -> u64 {
    splitmix64(splitmix64(root.wrapping_add(index)) ^ purpose)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
