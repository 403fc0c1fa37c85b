//! Seeded parameter sampler.
//!
//! ChaCha8 stream (via `rand_chacha`, seeded with `seed_from_u64`) feeding
//! 53-bit uniforms; normals come from the Box-Muller transform, consuming two
//! uniforms per pair of normals. Reproducible across platforms for this crate,
//! not across implementations.

use core::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct InitRng {
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl InitRng {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform angle on `[0, 2π)`.
    pub fn angle(&mut self) -> f64 {
        TAU * self.uniform()
    }

    /// Standard normal sample.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 − u lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let (s, c) = libm::sincos(TAU * u2);
        self.spare_normal = Some(radius * s);
        radius * c
    }

    pub fn normal(&mut self, mean: f64, std_dev: f64) -> f64 {
        mean + std_dev * self.standard_normal()
    }
}
