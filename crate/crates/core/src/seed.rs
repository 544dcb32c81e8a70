//! Seed derivation and the crate-wide RNG type.

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

/// Derives an independent stage seed from a global seed and a stage name.
///
/// Adding or reordering stages never perturbs the randomness of another stage.
pub fn derive_seed(global: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    h.update(stage.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stage_rng(global: u64, stage: &str) -> Rng {
    rng(derive_seed(global, stage))
}
