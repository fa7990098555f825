//! Reproducible uniform stream.
//!
//! The generator is xoshiro256++ whose 256-bit state is filled by four
//! consecutive SplitMix64 outputs starting from the 64-bit seed (the
//! reference seeding procedure). A uniform draw on `[0, 1)` is
//! `(next_u64 >> 11) · 2^-53`.
//!
//! Derived seeds (per run, per trial) are one SplitMix64 output:
//! `derive_seed(seed, index)` seeds SplitMix64 with
//! `seed + (index + 1) · 0x9E3779B97F4A7C15` (wrapping) and returns its
//! first output.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Pure function of `(seed, index)` used for per-run and per-trial streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let start = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    // SplitMix64 adds the gamma before mixing, so undo one step to make the
    // first output mix `start` itself.
    SplitMix64::seed_from_u64(start.wrapping_sub(GOLDEN_GAMMA)).next_u64()
}

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    position: u64,
    rng: Xoshiro256PlusPlus,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            position: 0,
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Independent stream number `index` derived from this stream's seed.
    /// Does not advance `self`.
    pub fn substream(&self, index: u64) -> Self {
        Self::new(derive_seed(self.seed, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of uniforms drawn so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        self.position += 1;
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
