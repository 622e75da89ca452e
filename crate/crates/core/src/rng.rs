//! Keyed random streams.
//!
//! Every random draw in the crate comes from a generator derived from a root
//! seed and a short tuple of integer keys (event id, read index, ...). A
//! stream depends only on its keys, so work can be split across threads in
//! any order and still reproduce bit for bit.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `keys` into `seed`, producing a well-mixed 64-bit sub-seed.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

pub fn stream(seed: u64, keys: &[u64]) -> StreamRng {
    Xoshiro256PlusPlus::seed_from_u64(derive_seed(seed, keys))
}
