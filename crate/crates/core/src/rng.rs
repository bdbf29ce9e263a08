//! Seed handling.
//!
//! Every random quantity is drawn from a ChaCha8 generator keyed by a 64-bit
//! seed and positioned on a fixed stream id. Distinct stream ids under the
//! same key never overlap, so the components of one simulated path (and the
//! noise added by the test statistics) are independent by construction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids reserved per component.
pub mod stream {
    /// Noise added by the Brownian-presence statistic.
    pub const PRESENCE_NOISE: u64 = 0;
    /// Noise added by the jump-activity statistic.
    pub const ACTIVITY_NOISE: u64 = 1;
    /// Constant-volatility Brownian driver.
    pub const DIFFUSION: u64 = 2;
    /// Correlated pair (W1, W2) of the stochastic-volatility model.
    pub const VOLATILITY: u64 = 3;
    /// Pure-jump Lévy component.
    pub const JUMPS: u64 = 4;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for item `index` (trial, batch, table cell) under `master`:
/// `splitmix64(splitmix64(master) ^ index)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}
