//! Deterministic RNG substream derivation.
//!
//! Every randomized stage draws from its own stream derived from
//! `(master_seed, purpose label, index)` through a keyed hash, so stages
//! can be reordered, parallelized, or resumed without perturbing each
//! other's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// 32-byte stream key for `(master_seed, label, index)`.
pub fn derive_key(master_seed: u64, label: &str, index: u64) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(b"looplab.v1");
    hasher.update(master_seed.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    hasher.finalize().into()
}

/// Seeded stream for `(master_seed, label, index)`.
pub fn derive_rng(master_seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_key(master_seed, label, index))
}

/// 64-bit sub-seed for `(master_seed, label, index)`, for handing a single
/// integer seed to a nested component.
pub fn derive_u64(master_seed: u64, label: &str, index: u64) -> u64 {
    let key = derive_key(master_seed, label, index);
    u64::from_le_bytes(key[..8].try_into().unwrap())
}
