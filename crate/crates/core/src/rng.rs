//! Seeded random streams.
//!
//! Every stochastic step draws from a `ChaCha8Rng`. Child streams are keyed
//! by mixing a parent seed with a tag (game index, run index, genome hash),
//! so results never depend on the order in which work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Build a stream from a 64-bit seed.
pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of a child stream from a parent seed and a tag.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    mix64(parent ^ mix64(tag.wrapping_add(0x632B_E59B_D9B4_E019)))
}

pub fn child_stream(parent: u64, tag: u64) -> Stream {
    stream(derive_seed(parent, tag))
}
