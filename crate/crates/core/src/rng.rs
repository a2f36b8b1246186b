//! Deterministic, order-independent random streams.
//!
//! Each stream is a ChaCha20 generator keyed by `SHA-256(seed || tag)`, so a
//! stream depends only on its `(master_seed, tag)` pair and never on how many
//! other streams were created before it.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

/// Tags for the streams an episode draws from.
pub mod tags {
    pub const INSTANCE: &str = "instance";
    pub const CONTEXTS: &str = "contexts";
    pub const NOISE: &str = "noise";
    pub const COINS: &str = "Z";
    pub const UNIFORM_ARM: &str = "uniform-arm";
}

#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha20Rng,
    tag: String,
}

/// Derives the stream for `(master_seed, tag)`.
pub fn derive_substream(master_seed: u64, tag: &str) -> RngStream {
    let mut hasher = Sha256::new();
    hasher.update(b"modsel/v1");
    hasher.update(master_seed.to_le_bytes());
    hasher.update((tag.len() as u64).to_le_bytes());
    hasher.update(tag.as_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    RngStream {
        rng: ChaCha20Rng::from_seed(key),
        tag: tag.to_string(),
    }
}

impl RngStream {
    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// `true` with probability `p` (clamped to `[0, 1]`). Always consumes one draw.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform index in `0..n`. Sampled through `u64` so the result does not
    /// depend on the platform's pointer width.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be non-empty");
        self.rng.random_range(0..n as u64) as usize
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
