//! Reproducible per-path random streams.
//!
//! A master seed and an experiment label are hashed with SHA-256 into a
//! 256-bit ChaCha key. Path `i` of that experiment uses the ChaCha8 stream
//! with stream id `i`, so every path owns an independent, counter-based
//! sequence that does not depend on which worker evaluates it.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type PathRng = ChaCha8Rng;

/// 64-bit seed for a named sub-experiment of `seed`.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(b"seed/");
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamFactory {
    key: [u8; 32],
}

impl StreamFactory {
    pub fn new(seed: u64, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(label.as_bytes());
        StreamFactory {
            key: hasher.finalize().into(),
        }
    }

    /// Child factory for a sub-experiment.
    pub fn derive(&self, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(self.key);
        hasher.update(b"/");
        hasher.update(label.as_bytes());
        StreamFactory {
            key: hasher.finalize().into(),
        }
    }

    pub fn stream(&self, index: u64) -> PathRng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}
