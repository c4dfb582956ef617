//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream keyed by a
//! 64-bit seed and selected by a 64-bit index, so a sample is a pure function
//! of `(seed, index)` regardless of evaluation order or thread count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAG_DOMAIN: &[u8; 16] = b"rpn-energy/tags\0";

/// Independent stream number `index` under key `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a child seed for a named purpose, so that different consumers of
/// the same user seed draw from unrelated streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag.to_le_bytes());
    key[16..].copy_from_slice(TAG_DOMAIN);
    ChaCha8Rng::from_seed(key).next_u64()
}
