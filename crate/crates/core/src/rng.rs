//! Seed plumbing. Every stochastic component receives an explicit seed so that
//! runs are bit-reproducible regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from a base seed and a path of tags.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix(base), |acc, &t| mix(acc ^ mix(t)))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

// Stream tags, kept distinct so that different consumers never share a stream.
pub(crate) const TAG_INIT: u64 = 1;
pub(crate) const TAG_EPOCH: u64 = 2;
pub(crate) const TAG_GRAPH: u64 = 3;
pub(crate) const TAG_DATA: u64 = 4;
