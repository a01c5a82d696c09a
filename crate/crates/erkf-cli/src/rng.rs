//! Seeded random source for synthetic data.
//!
//! One ChaCha12 stream drives a whole generation run, with Box–Muller
//! sampling for normal deviates. The stream position — and therefore
//! every generated byte — is a pure function of the seed and the
//! documented draw order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Deterministic uniform/normal source for one generation run.
pub struct NoiseRng {
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl NoiseRng {
    /// A fresh stream for the given seed.
    pub fn new(seed: u64) -> NoiseRng {
        NoiseRng {
            rng: ChaCha12Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Standard normal deviate; Box–Muller pairs are consumed in order.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        // 1 − u ∈ (0, 1] keeps the logarithm finite.
        let u1: f64 = 1.0 - self.rng.random::<f64>();
        let u2: f64 = self.rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    /// Normal deviate with standard deviation `sigma`.
    pub fn normal(&mut self, sigma: f64) -> f64 {
        sigma * self.standard_normal()
    }
}
