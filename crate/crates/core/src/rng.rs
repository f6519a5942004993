//! Seeded, platform-independent random streams.
//!
//! Every stochastic component draws from an [`RngStream`], a thin wrapper over
//! ChaCha8. Identical seeds produce identical sequences on every platform.
//! Trial streams are derived from `(master_seed, trial_index)` with
//! [`derive_seed`], so trials can run in any order or in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Source of uniform draws in `[0, 1)`.
///
/// The optimizers are generic over this trait so tests can pin the draws.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;

    /// Uniform draw in `[lo, hi)`.
    fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_uniform()
    }
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for one trial of an experiment.
    pub fn for_trial(master_seed: u64, trial_index: usize) -> Self {
        Self::new(derive_seed(master_seed, trial_index as u64))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }
}

impl UniformSource for RngStream {
    fn next_uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

/// Constant draws, for pinning random factors in hand-checked examples.
#[derive(Debug, Clone, Copy)]
pub struct FixedUniform(pub f64);

impl UniformSource for FixedUniform {
    fn next_uniform(&mut self) -> f64 {
        self.0
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent child seed from a parent seed and an index.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix64(parent.wrapping_add(0x9e37_79b9_7f4a_7c15) ^ mix64(index.wrapping_add(1)))
}
