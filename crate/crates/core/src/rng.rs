//! Named random sub-streams derived from a single user seed.
//!
//! Every stochastic component (factor initialisation, document sampling,
//! word injection, background text) draws from its own ChaCha stream so a
//! component can be reproduced without replaying the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const INIT: &str = "init";
pub const RESAMPLE: &str = "resample";
pub const SAMPLING: &str = "sampling";
pub const INJECTION: &str = "injection";
pub const BACKGROUND: &str = "background";

/// Deterministic generator for the sub-stream `name` of `seed`.
pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, name))
}

fn mix(seed: u64, name: &str) -> u64 {
    // FNV-1a over the stream name, folded into the seed with a splitmix64 finaliser.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
