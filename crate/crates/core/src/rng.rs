//! Seeded, stream-addressable randomness for reproducible Monte Carlo.
//!
//! Every trial gets its own ChaCha substream, so results are identical
//! whether trials run serially or in parallel.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Factory for per-trial random substreams derived from one experiment seed.
#[derive(Debug, Clone, Copy)]
pub struct Substreams {
    seed: u64,
}

impl Substreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Independent generator for stream `id`. Same `(seed, id)` always
    /// yields the same sequence, regardless of scheduling.
    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }

    /// Namespaced substream: `phase` partitions the id space so different
    /// experiment stages can index trials from zero without collisions.
    pub fn stream_in(&self, phase: u32, trial: u32) -> ChaCha8Rng {
        self.stream(((phase as u64) << 32) | trial as u64)
    }
}
