use std::f64::consts::PI;

use rand::Rng as _;

use super::Kernel2D;
use crate::error::{ensure, Result};
use crate::imaging::Rng;

/// Shape of an anisotropic Gaussian: covariance eigenvalues and rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianShape {
    pub lambda1: f64,
    pub lambda2: f64,
    pub theta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthOptions {
    pub size: usize,
    pub lambda_range: (f64, f64),
    /// Each tap is multiplied by `u ~ U(1 - noise_amp, 1 + noise_amp)`.
    pub noise_amp: f64,
}

impl SynthOptions {
    /// Defaults for a scale factor: support 15 for ×2, 21 for ×4.
    pub fn for_scale(scale: usize) -> Self {
        Self {
            size: if scale >= 4 { 21 } else { 15 },
            lambda_range: (0.6, 5.0),
            noise_amp: 0.25,
        }
    }
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self::for_scale(2)
    }
}

/// Anisotropic Gaussian sampled at integer offsets around the centre tap and
/// normalized to unit sum.
///
/// The covariance is `R(θ) diag(λ1, λ2) R(θ)ᵀ`.
pub fn anisotropic_gaussian(size: usize, shape: GaussianShape) -> Result<Kernel2D> {
    ensure!(size % 2 == 1, "kernel size must be odd, got {size}");
    ensure!(
        shape.lambda1 > 0.0 && shape.lambda2 > 0.0,
        "covariance eigenvalues must be positive"
    );
    let (s, c) = shape.theta.sin_cos();
    // Inverse covariance R diag(1/λ1, 1/λ2) Rᵀ.
    let (i1, i2) = (1.0 / shape.lambda1, 1.0 / shape.lambda2);
    let a = c * c * i1 + s * s * i2;
    let b = c * s * (i1 - i2);
    let d = s * s * i1 + c * c * i2;
    let r = (size / 2) as f64;
    let mut taps = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let (py, px) = (y as f64 - r, x as f64 - r);
            let q = a * px * px + 2.0 * b * px * py + d * py * py;
            taps.push((-0.5 * q).exp());
        }
    }
    Kernel2D::new(size, taps)?.normalized()
}

/// Draws a random blur kernel: anisotropic Gaussian with `λ1, λ2 ~
/// U(lambda_range)`, `θ ~ U[-π, π]`, followed by per-tap multiplicative
/// noise and renormalization.
pub fn synth_kernel(rng: &mut Rng, opts: SynthOptions) -> Result<(Kernel2D, GaussianShape)> {
    ensure!(opts.size % 2 == 1, "kernel size must be odd, got {}", opts.size);
    let (lo, hi) = opts.lambda_range;
    ensure!(0.0 < lo && lo <= hi, "bad eigenvalue range {lo}..{hi}");
    ensure!(
        (0.0..1.0).contains(&opts.noise_amp),
        "noise amplitude must be in [0, 1), got {}",
        opts.noise_amp
    );
    let shape = GaussianShape {
        lambda1: rng.random_range(lo..=hi),
        lambda2: rng.random_range(lo..=hi),
        theta: rng.random_range(-PI..=PI),
    };
    let mut k = anisotropic_gaussian(opts.size, shape)?;
    if opts.noise_amp > 0.0 {
        let amp = opts.noise_amp;
        let taps: Vec<f64> = k
            .taps()
            .iter()
            .map(|&t| t * rng.random_range(1.0 - amp..=1.0 + amp))
            .collect();
        k = Kernel2D::new(opts.size, taps)?.normalized()?;
    }
    Ok((k, shape))
}
