//! Counter-based random source for path simulation.
//!
//! Each (seed, path_index) pair owns an independent substream; the k-th
//! Gaussian of a substream is a pure function of (seed, path_index, k). That
//! makes every path reproducible on its own, independent of how an ensemble is
//! partitioned across workers, threads, or runs.
//!
//! Construction: the SplitMix64 finalizer applied to key + step * GAMMA, where
//! the per-path key is itself two finalizer rounds over (seed, path_index).
//! Uniforms take the top 53 bits centered into the open interval (0, 1);
//! Gaussians go through the inverse normal CDF, so the mapping from counter to
//! variate involves no rejection step and no shared state.

use crate::normal::std_normal_inverse;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-step noise. Implemented by [`CounterRng`] for production
/// draws and by plain closures in tests that force specific increments.
pub trait NoiseSource {
    /// Standard normal variate for the given step counter.
    fn standard_normal(&self, step: u64) -> f64;
}

impl<F: Fn(u64) -> f64> NoiseSource for F {
    fn standard_normal(&self, step: u64) -> f64 {
        self(step)
    }
}

/// Stateless Gaussian stream keyed by (seed, path_index).
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    key: u64,
    sign: f64,
}

impl CounterRng {
    pub fn new(seed: u64, path_index: u64) -> Self {
        let key = mix(mix(seed.wrapping_add(GAMMA)).wrapping_add(path_index.wrapping_mul(GAMMA)));
        CounterRng { key, sign: 1.0 }
    }

    /// Stream whose Gaussians are the negation of `new(seed, pair_index)`,
    /// for antithetic path pairs.
    pub fn mirrored(seed: u64, pair_index: u64) -> Self {
        let mut rng = CounterRng::new(seed, pair_index);
        rng.sign = -1.0;
        rng
    }

    fn raw(&self, step: u64) -> u64 {
        mix(self.key.wrapping_add(step.wrapping_mul(GAMMA)))
    }

    /// Uniform in the open interval (0, 1), 53-bit resolution.
    pub fn uniform(&self, step: u64) -> f64 {
        ((self.raw(step) >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }
}

impl NoiseSource for CounterRng {
    fn standard_normal(&self, step: u64) -> f64 {
        self.sign * std_normal_inverse(self.uniform(step))
    }
}
