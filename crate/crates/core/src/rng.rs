//! Seed derivation for independent, reproducible random streams.
//!
//! A stream is identified by a base seed and a path of integers (for
//! example `[experiment, n, trial]`). Each path element is folded in with
//! the SplitMix64 finalizer, so streams do not depend on the order in
//! which trials are executed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `s_0 = splitmix64(base)`, `s_{i+1} = splitmix64(s_i ^ path[i])`.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(base), |s, &p| splitmix64(s ^ p))
}

pub fn stream_rng(base: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, path))
}
