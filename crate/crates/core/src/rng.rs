//! Seeded pseudo-random numbers.
//!
//! The generator is splitmix64: one 64-bit word of state, trivially
//! reimplementable in any language, with published test vectors. Normal
//! variates come from the Box–Muller transform and truncated normals from
//! rejection sampling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Rejection attempts before a truncated-normal draw gives up.
pub const MAX_REJECTIONS: u32 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("degenerate truncation interval [{lo}, {hi}]")]
    DegenerateInterval { lo: f64, hi: f64 },
    #[error("negative standard deviation {0}")]
    NegativeSd(f64),
    #[error("no sample accepted in [{lo}, {hi}] after {MAX_REJECTIONS} draws")]
    RejectionExhausted { lo: f64, hi: f64 },
}

/// splitmix64 generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prng {
    state: u64,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, 1)`: the top 53 bits of the next output times 2^-53,
    /// i.e. the raw output times 2^-64 rounded down to double precision.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller (cosine branch only).
    pub fn next_standard_normal(&mut self) -> f64 {
        // 1 - u lies in (0, 1], so the logarithm is finite.
        let u1 = 1.0 - self.next_uniform();
        let u2 = self.next_uniform();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
    }
}

/// Draws from normal(`mean`, `sd`) conditioned on `[lo, hi]`.
///
/// With `sd == 0` the mean itself is returned (clamped into the interval),
/// consuming no randomness.
pub fn sample_truncated_normal(
    prng: &mut Prng,
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
) -> Result<f64, SamplingError> {
    if !(lo < hi) {
        return Err(SamplingError::DegenerateInterval { lo, hi });
    }
    if sd < 0.0 {
        return Err(SamplingError::NegativeSd(sd));
    }
    if sd == 0.0 {
        return Ok(mean.clamp(lo, hi));
    }
    for _ in 0..MAX_REJECTIONS {
        let x = mean + sd * prng.next_standard_normal();
        if x >= lo && x <= hi {
            return Ok(x);
        }
    }
    Err(SamplingError::RejectionExhausted { lo, hi })
}
