//! Seed derivation for independent, reproducible random streams.
//!
//! Every generator in the crate draws from a [`ChaCha8Rng`] whose seed is
//! derived from a master seed plus a stream label and an index. Streams are
//! therefore independent of the order in which they are consumed, which keeps
//! parallel construction bit-identical to sequential construction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream type used throughout the crate.
pub type Rng = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a master seed with a stream label and an index into a new seed.
pub fn derive(master: u64, label: &str, index: u64) -> u64 {
    let mut h = splitmix64(master);
    for b in label.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ splitmix64(index))
}

/// A stream seeded directly from `seed`.
pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// A stream for `(master, label, index)`.
pub fn stream(master: u64, label: &str, index: u64) -> Rng {
    rng(derive(master, label, index))
}
