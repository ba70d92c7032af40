use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::Split;

const SEED_DOMAIN: &[u8] = b"fovmap/world-seed/v1";

/// Stable 64-bit seed for run `index` of `split` in an experiment.
///
/// First eight bytes (little-endian) of
/// `SHA-256("fovmap/world-seed/v1" ‖ base_seed:u64le ‖ experiment:u8 ‖ split:u8 ‖ index:u64le)`,
/// with split tags train = 0, val = 1, test = 2.
pub fn derive_seed(base_seed: u64, experiment: u8, split: Split, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(SEED_DOMAIN);
    hasher.update(base_seed.to_le_bytes());
    hasher.update([experiment, split.tag()]);
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

/// The random stream that drives one simulated world.
pub fn world_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
