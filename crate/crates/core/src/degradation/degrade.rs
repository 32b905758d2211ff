use rand_distr::{Distribution, Normal};

use super::Kernel2D;
use crate::error::{ensure, Result};
use crate::imaging::{ImageBuf, Rng};
use crate::numcore::{bicubic_resample, conv2d, Direction, Padding, Tensor};

/// Blur kernel, integer downscale and white-noise level of an observation.
#[derive(Clone, Debug, PartialEq)]
pub struct DegradationSpec {
    pub kernel: Kernel2D,
    pub scale: usize,
    /// Standard deviation of the additive Gaussian noise on the `[0, 1]` range.
    pub noise_sigma: f64,
}

impl DegradationSpec {
    pub fn new(kernel: Kernel2D, scale: usize, noise_sigma: f64) -> Result<Self> {
        ensure!(
            matches!(scale, 1 | 2 | 4),
            "scale must be 1, 2 or 4, got {scale}"
        );
        ensure!(
            noise_sigma >= 0.0 && noise_sigma.is_finite(),
            "noise sigma must be a finite non-negative number"
        );
        Ok(Self {
            kernel,
            scale,
            noise_sigma,
        })
    }

    /// Pure bicubic downscaling, no blur and no noise.
    pub fn bicubic(scale: usize) -> Result<Self> {
        Self::new(Kernel2D::delta(1)?, scale, 0.0)
    }
}

/// Reflect-padded correlation of every channel with one kernel.
pub fn blur<T: crate::numcore::Scalar>(x: &Tensor<T>, kernel: &Kernel2D) -> Result<Tensor<T>> {
    let shape = x.shape().to_vec();
    ensure!(
        shape.len() >= 2,
        "blur needs at least two spatial axes, got {shape:?}"
    );
    let r = shape.len();
    let (h, w) = (shape[r - 2], shape[r - 1]);
    let planes: usize = shape[..r - 2].iter().product();
    let pad = kernel.size() / 2;
    ensure!(
        pad < h && pad < w,
        "kernel of size {} is too large for a {h}x{w} image",
        kernel.size()
    );
    let flat = x.clone().reshape(vec![planes, 1, h, w])?;
    let out = conv2d(&flat, &kernel.to_tensor::<T>(), None, Padding::Reflect, 1)?;
    out.reshape(shape)
}

/// Blur, bicubic downscale, add noise, clamp to `[0, 1]`.
///
/// Computed in `f64`; with zero noise the result does not depend on `rng`.
pub fn degrade(x: &ImageBuf, spec: &DegradationSpec, rng: &mut Rng) -> Result<ImageBuf> {
    let s = spec.scale;
    ensure!(
        x.height() % s == 0 && x.width() % s == 0,
        "image extent {}x{} is not divisible by scale {s}",
        x.height(),
        x.width()
    );
    let t: Tensor<f64> = x.to_tensor().cast();
    let blurred = blur(&t, &spec.kernel)?;
    let mut low = bicubic_resample(&blurred, s, Direction::Down)?;
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma).expect("validated sigma");
        for v in low.data_mut() {
            *v += normal.sample(rng);
        }
    }
    let out = low.map(|v| v.clamp(0.0, 1.0)).cast::<f32>();
    ImageBuf::from_tensor(&out, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_degradation_is_exact() {
        let px: Vec<f32> = (0..3 * 16 * 12).map(|i| (i % 31) as f32 / 31.0).collect();
        let x = ImageBuf::new(3, 16, 12, px).unwrap();
        let spec = DegradationSpec::new(Kernel2D::delta(5).unwrap(), 1, 0.0).unwrap();
        assert_eq!(degrade(&x, &spec, &mut Rng::new(0)).unwrap(), x);
    }

    #[test]
    fn constant_survives_blur_and_downscale() {
        let x = ImageBuf::filled(3, 32, 32, 0.5).unwrap();
        let spec = DegradationSpec::new(Kernel2D::gaussian(7, 1.7).unwrap(), 2, 0.0).unwrap();
        let y = degrade(&x, &spec, &mut Rng::new(0)).unwrap();
        assert_eq!((y.height(), y.width()), (16, 16));
        assert!(y.pixels().iter().all(|&v| (v - 0.5).abs() <= 1e-6));
    }

    #[test]
    fn non_divisible_rejected() {
        let x = ImageBuf::filled(1, 18, 18, 0.5).unwrap();
        let spec = DegradationSpec::bicubic(4).unwrap();
        assert!(degrade(&x, &spec, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let x = ImageBuf::filled(1, 16, 16, 0.5).unwrap();
        let spec = DegradationSpec::new(Kernel2D::delta(1).unwrap(), 2, 0.05).unwrap();
        let a = degrade(&x, &spec, &mut Rng::new(9)).unwrap();
        let b = degrade(&x, &spec, &mut Rng::new(9)).unwrap();
        let c = degrade(&x, &spec, &mut Rng::new(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
