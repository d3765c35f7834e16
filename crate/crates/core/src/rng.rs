//! Counter-based random streams.
//!
//! Every consumer of randomness derives its generator from `(seed, domain,
//! index)`: the seed and domain select a ChaCha8 key, the index selects the
//! ChaCha stream. Streams are independent of evaluation order, which is what
//! makes parallel replicates reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Simulated asset paths.
pub const DOMAIN_SIMULATE: u64 = 0x5349_4d55_4c41_5445;
/// Bootstrap day draws.
pub const DOMAIN_BOOTSTRAP: u64 = 0x424f_4f54_5354_5250;

pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(domain)));
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
