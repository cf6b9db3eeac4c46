//! Seedable, splittable random source shared by every stochastic operation.
//!
//! A run owns exactly one [`SimRng`]. Sub-computations that may execute in
//! parallel (measurement shots, independent algorithm runs) draw child
//! generators either with [`SimRng::split`], which advances the parent, or
//! with [`SimRng::stream`], which addresses a child by index without touching
//! the parent. Both are deterministic, so results do not depend on thread
//! scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct SimRng {
    inner: ChaCha8Rng,
    seed: u64,
}

impl SimRng {
    pub fn seed_from(seed: u64) -> Self {
        Self { inner: ChaCha8Rng::seed_from_u64(seed), seed }
    }

    /// The seed this generator (or its root) was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Draw an independent child generator, advancing `self`.
    pub fn split(&mut self) -> SimRng {
        let child_seed = self.inner.next_u64();
        SimRng::seed_from(child_seed)
    }

    /// The `index`-th child stream of this generator's seed. Does not advance
    /// `self`; identical `(seed, index)` pairs always give identical streams.
    pub fn stream(&self, index: u64) -> SimRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(index.wrapping_add(1));
        SimRng { inner, seed: self.seed }
    }
}

impl RngCore for SimRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
