//! splitmix64 and the helpers built on it.
//!
//! Every random draw in the crate goes through this generator so that phase
//! sampling, fault sampling and shot sampling are bit-reproducible on any
//! platform and under any thread schedule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_A: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_B: u64 = 0x94D0_49BB_1331_11EB;

/// One splitmix64 step: returns `(new_state, output)`.
#[inline]
pub fn prng_next(state: u64) -> (u64, u64) {
    let state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(MIX_A);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_B);
    (state, z ^ (z >> 31))
}

/// Maps a 64-bit output onto `[0, 1)` using its top 53 bits.
#[inline]
pub fn unit_interval(output: u64) -> f64 {
    (output >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Closed interval of angles in radians. Samples land in `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    pub lo: f64,
    pub hi: f64,
}

impl AngleInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let interval = AngleInterval { lo, hi };
        interval.validate()?;
        Ok(interval)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::invalid("angle interval", "bounds must be finite"));
        }
        if self.lo > self.hi {
            return Err(Error::invalid(
                "angle interval",
                format!("reversed bounds [{}, {}]", self.lo, self.hi),
            ));
        }
        Ok(())
    }

    pub fn contains(&self, angle: f64) -> bool {
        self.lo <= angle && angle <= self.hi
    }
}

/// `a + u * (b - a)` with `u = unit_interval(output)`.
pub fn uniform_angle(output: u64, interval: AngleInterval) -> Result<f64> {
    interval.validate()?;
    Ok(interval.lo + unit_interval(output) * (interval.hi - interval.lo))
}

/// Stateful wrapper around [`prng_next`].
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let (state, out) = prng_next(self.state);
        self.state = state;
        out
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        unit_interval(self.next_u64())
    }

    /// Uniform integer in `0..bound` (bound > 0), via 128-bit multiply.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}

/// Derives an independent stream seed from a base seed and a task path,
/// e.g. `(exec_seed, [layout, member, trajectory])`.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(prng_next(base).1, |acc, &step| {
        prng_next(acc ^ prng_next(step.wrapping_add(GOLDEN_GAMMA)).1).1
    })
}
