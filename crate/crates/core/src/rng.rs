//! Seed derivation.
//!
//! Every random consumer in the crate gets its own ChaCha8 stream whose seed is
//! derived from a base seed and a short path of tags, e.g.
//! `derive_seed(base, &[STRATEGY_DAFL, seed_index, PURPOSE_SELECT])`. The
//! derivation folds each tag into the state with a SplitMix64 finalizer, so
//! adding a new tag path never shifts the stream of an existing one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix64(base), |acc, &t| mix64(acc ^ mix64(t)))
}

pub fn rng_for(base: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tags))
}

/// Tag constants for the purposes that draw randomness.
pub mod purpose {
    pub const INIT: u64 = 1;
    pub const SHUFFLE: u64 = 2;
    pub const SPLIT: u64 = 3;
    pub const SELECT: u64 = 4;
    pub const REPLAY: u64 = 5;
    pub const BOOTSTRAP: u64 = 6;
    pub const SYNTH: u64 = 7;
    pub const AUGMENT: u64 = 8;
    pub const PRETRAIN: u64 = 9;
    pub const STREAM: u64 = 10;
    pub const LOOP: u64 = 11;
}
