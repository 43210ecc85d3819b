//! Named, reproducible random streams.
//!
//! Every stochastic source draws from a ChaCha stream keyed by
//! `SHA-256(seed || name)`, so streams never alias and adding a new stream
//! does not perturb existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

fn digest(seed: u64, name: &str, index: Option<u64>) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((name.len() as u64).to_le_bytes());
    hasher.update(name.as_bytes());
    if let Some(index) = index {
        hasher.update(index.to_le_bytes());
    }
    hasher.finalize().into()
}

/// RNG for the stream `name` under `seed`.
pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(digest(seed, name, None))
}

/// Seed for round `round` of an experiment with `master_seed`.
pub fn round_seed(master_seed: u64, round: u64) -> u64 {
    let d = digest(master_seed, "round", Some(round));
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}
