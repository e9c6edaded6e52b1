//! Deterministic hierarchical random streams.
//!
//! Every source of randomness in the crate flows from a single master seed
//! through [`SeedStream`]. A stream is a 64-bit key; `child(i)` derives an
//! independent key by a SplitMix64-style mix, and `rng()` instantiates a
//! ChaCha8 generator from the key. Work items (permutations, replications,
//! trees) each consume a pre-assigned child stream indexed by their position,
//! so results do not depend on scheduling or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    key: u64,
}

impl SeedStream {
    /// Root stream for a master seed.
    pub fn root(seed: u64) -> Self {
        SeedStream { key: mix(seed, 0x706974652d726e67) } // "pite-rng"
    }

    /// Derive the `index`-th child stream.
    pub fn child(self, index: u64) -> Self {
        SeedStream { key: mix(self.key, index) }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key)
    }

    pub fn key(self) -> u64 {
        self.key
    }
}

/// SplitMix64 finalizer over a golden-ratio combination of the inputs.
fn mix(state: u64, index: u64) -> u64 {
    let mut z = state ^ index.wrapping_mul(0x9e3779b97f4a7c15).rotate_left(23);
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
