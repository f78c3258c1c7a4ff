//! Keyed deterministic randomness.
//!
//! Every random decision in the pipeline draws from a ChaCha stream whose
//! seed is derived from the global seed, a stage label and a per-item key
//! (author index, path index, epoch, ...). Work can therefore be reordered or
//! parallelized without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit key for `(global, stage, parts)`.
pub fn derive_seed(global: u64, stage: &str, parts: &[u64]) -> u64 {
    // FNV-1a over the label
    let mut label = 0xcbf2_9ce4_8422_2325u64;
    for b in stage.bytes() {
        label ^= b as u64;
        label = label.wrapping_mul(0x0100_0000_01b3);
    }
    let mut h = splitmix(global ^ splitmix(label));
    for &p in parts {
        h = splitmix(h ^ splitmix(p.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

pub fn keyed_rng(global: u64, stage: &str, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(global, stage, parts))
}

/// Stable hash of a pair of integers, used for hash-ordered splits.
pub fn pair_hash(a: u64, b: u64) -> u64 {
    splitmix(splitmix(a) ^ b.rotate_left(32))
}
