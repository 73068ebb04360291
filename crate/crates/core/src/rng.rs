//! Portable seeded random numbers.
//!
//! The generator is PCG-XSH-RR 64/32 (`rand_pcg::Pcg32`) constructed with
//! `Pcg32::new(seed, STREAM)`. Every derived quantity is defined in terms of
//! its 32-bit outputs so any PCG32 implementation reproduces the same streams:
//!
//! * `next_u64 = (hi << 32) | lo`, where `hi` is drawn before `lo`;
//! * `uniform = (next_u64 >> 11) · 2⁻⁵³`, in `[0, 1)`;
//! * normals by Box–Muller on two uniforms `u1, u2` (with `u1` mapped to
//!   `1 − u1` so the logarithm is finite), returning
//!   `r cos(2πu2)` first and caching `r sin(2πu2)` for the next call.

use rand_core::Rng;
use rand_pcg::Pcg32;

/// PCG's default stream constant (`1442695040888963407 >> 1`).
pub const STREAM: u64 = 0x0a02_bdbf_7bb3_c0a7;

#[derive(Clone, Debug)]
pub struct PortableRng {
    inner: Pcg32,
    spare: Option<f64>,
}

impl PortableRng {
    pub fn new(seed: u64) -> Self {
        PortableRng {
            inner: Pcg32::new(seed, STREAM),
            spare: None,
        }
    }

    pub fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    pub fn next_u64(&mut self) -> u64 {
        let hi = self.inner.next_u32() as u64;
        let lo = self.inner.next_u32() as u64;
        (hi << 32) | lo
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn normal_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.standard_normal()).collect()
    }

    pub fn uniform_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.uniform()).collect()
    }
}
