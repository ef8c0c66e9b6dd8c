//! Seeded random streams.
//!
//! Every stochastic step draws from a ChaCha8 stream whose 256-bit key is the
//! SHA-256 digest of `(master seed, stream label, stream index)`. Streams are
//! therefore independent of each other, of evaluation order and of the thread
//! count, and the same seed reproduces the same bits on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

/// Opens the stream `label`/`index` under `master`.
pub fn stream(master: u64, label: &str, index: u64) -> StreamRng {
    ChaCha8Rng::from_seed(derive_key(master, label, index))
}

/// Derives a 64-bit sub-seed, e.g. for keying a noise field.
pub fn subseed(master: u64, label: &str, index: u64) -> u64 {
    let key = derive_key(master, label, index);
    u64::from_le_bytes(key[..8].try_into().expect("digest is 32 bytes"))
}

fn derive_key(master: u64, label: &str, index: u64) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    hasher.finalize().into()
}
