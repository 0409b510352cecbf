//! Seed derivation and RNG streams.
//!
//! Every randomized routine takes an explicit `(seed, stream)` pair so that
//! parallel or re-ordered execution reproduces identical values.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// splitmix64 step; used only for deriving sub-seeds, never as the sampler.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a base seed and a stream label.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Deterministic stream RNG for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(seed, stream))
}

/// Hashes a small f64 tuple into a stream label (for per-sample-point RNGs).
pub fn stream_of_coords(coords: &[f64]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &c in coords {
        h ^= c.to_bits();
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}
