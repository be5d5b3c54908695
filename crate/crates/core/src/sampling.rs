//! Counter-based sampling of random test inputs.
//!
//! Every sample is drawn from a stream keyed by `(seed, stream)`; the `k`-th
//! 64-bit word of a stream is
//!
//! ```text
//! key  = mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15))
//! word = mix64(key + k * 0x9E3779B97F4A7C15),  k = 1, 2, ...
//! ```
//!
//! where `mix64` is the SplitMix64 finalizer (all arithmetic wrapping mod
//! 2^64). A uniform double is `(word >> 11) * 2^-53`; a standard normal is
//! `sqrt(-2 ln(1 - u1)) * cos(2π u2)` from two consecutive uniforms; a
//! complex normal is `(x + i y) / √2` with `x` drawn before `y`. Matrices are
//! filled row-major. Because each sweep item owns its stream, results do not
//! depend on how items are scheduled across threads.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::CMat;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SampleStream {
    key: u64,
    counter: u64,
}

impl SampleStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            key: mix64(seed ^ mix64(stream.wrapping_add(GOLDEN_GAMMA))),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        let re = self.normal();
        let im = self.normal();
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn real_normals(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.normal()).collect()
    }

    pub fn complex_matrix(&mut self, rows: usize, cols: usize) -> CMat {
        let values: Vec<Complex64> = (0..rows * cols).map(|_| self.complex_normal()).collect();
        DMatrix::from_row_slice(rows, cols, &values)
    }

    /// Gaussian matrix rescaled so its largest singular value is
    /// `u · bound` with `u` uniform in `[0, 1)`.
    pub fn bounded_matrix(&mut self, rows: usize, cols: usize, bound: f64) -> CMat {
        let g = self.complex_matrix(rows, cols);
        let target = bound * self.uniform();
        let sigma = crate::matfun::SpectralFactorization::of(&g).largest();
        if sigma == 0.0 {
            return g;
        }
        g * Complex64::new(target / sigma, 0.0)
    }

    /// Gaussian matrix rescaled to unit Frobenius norm.
    pub fn unit_matrix(&mut self, rows: usize, cols: usize) -> CMat {
        let g = self.complex_matrix(rows, cols);
        let norm = g.norm();
        g / Complex64::new(norm, 0.0)
    }

    /// Haar-distributed unitary (QR of a complex Gaussian with phase fix).
    pub fn unitary(&mut self, dim: usize) -> CMat {
        let g = self.complex_matrix(dim, dim);
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        q
    }
}
