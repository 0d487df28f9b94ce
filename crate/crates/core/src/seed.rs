//! Stable seed derivation.
//!
//! Per-point RNG streams are keyed by integers and strings through
//! SplitMix64 and FNV-1a so that results do not depend on the internal
//! hashing of `std` or the iteration order of a sweep.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Seed for the point where sweep parameter `name` takes `value`.
pub fn point_seed(global: u64, name: &str, value: f64) -> u64 {
    let value_bits = if value == 0.0 { 0 } else { value.to_bits() };
    splitmix64(splitmix64(global ^ fnv1a(name.as_bytes())) ^ value_bits)
}

/// Seed for item `index` of a batch.
pub fn item_seed(global: u64, index: u64) -> u64 {
    global ^ index
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
