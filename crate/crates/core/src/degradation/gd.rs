//! The learnable degradation: three bias-free, activation-free convolutions
//! with a single spatial kernel shared by all colour channels, followed by a
//! fixed bicubic downscale.

use super::Kernel2D;
use crate::error::{contract, ensure, Result};
use crate::imaging::Rng;
use crate::models::{ModelParams, Role};
use crate::numcore::{bicubic_resample, conv2d, Direction, Padding, Scalar, Tape, Tensor, Var};

/// Convolutions pad by reflection so a unit-sum stack keeps flat regions
/// flat right up to the border.
pub const GD_PADDING: Padding = Padding::Reflect;

/// Spatial extents of the three layers for a scale factor.
pub fn layer_extents(scale: usize) -> Result<[usize; 3]> {
    match scale {
        2 => Ok([3, 7, 9]),
        4 => Ok([9, 15, 17]),
        _ => Err(contract!("the degradation network supports scales 2 and 4, got {scale}")),
    }
}

/// Smallest support that holds the full composed kernel.
pub fn min_support(scale: usize) -> Result<usize> {
    Ok(layer_extents(scale)?.iter().sum::<usize>() - 2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GdNet {
    scale: usize,
    layers: [Tensor; 3],
}

impl GdNet {
    pub fn layer_name(i: usize) -> String {
        format!("conv{}.weight", i + 1)
    }

    /// Network with the given layer kernels; extents must match the scale.
    pub fn from_kernels(scale: usize, kernels: [Kernel2D; 3]) -> Result<Self> {
        let ext = layer_extents(scale)?;
        for (k, e) in kernels.iter().zip(ext) {
            ensure!(
                k.size() == e,
                "layer kernel of size {} where the x{scale} network needs {e}",
                k.size()
            );
        }
        let [a, b, c] = kernels;
        Ok(Self {
            scale,
            layers: [a.to_tensor(), b.to_tensor(), c.to_tensor()],
        })
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn layers(&self) -> &[Tensor; 3] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Tensor; 3] {
        &mut self.layers
    }

    pub fn layer_kernel(&self, i: usize) -> Kernel2D {
        Kernel2D::from_tensor(&self.layers[i]).expect("layer invariant")
    }

    pub fn to_params(&self) -> ModelParams {
        let mut p = ModelParams::new(Role::Gd);
        for (i, t) in self.layers.iter().enumerate() {
            p.insert(Self::layer_name(i), t.detached())
                .expect("distinct layer names");
        }
        p
    }

    pub fn from_params(params: &ModelParams) -> Result<Self> {
        ensure!(
            params.role() == Role::Gd,
            "expected degradation network parameters, found role {:?}",
            params.role()
        );
        let mut sizes = [0usize; 3];
        let mut layers = Vec::with_capacity(3);
        for (i, size) in sizes.iter_mut().enumerate() {
            let name = Self::layer_name(i);
            let t = params.get(&name).ok_or_else(|| crate::Error::ParamMismatch {
                name: name.clone(),
                detail: "missing".into(),
            })?;
            let k = Kernel2D::from_tensor(t).map_err(|e| crate::Error::ParamMismatch {
                name: name.clone(),
                detail: e.to_string(),
            })?;
            *size = k.size();
            layers.push(k);
        }
        ensure!(
            params.len() == 3,
            "degradation network file holds {} tensors, expected 3",
            params.len()
        );
        let scale = [2, 4]
            .into_iter()
            .find(|&s| layer_extents(s).unwrap() == sizes)
            .ok_or_else(|| contract!("layer extents {sizes:?} match no supported scale"))?;
        let [a, b, c]: [Kernel2D; 3] = layers.try_into().expect("three layers");
        Self::from_kernels(scale, [a, b, c])
    }

    /// Moves every layer onto the unit-sum hyperplane (Euclidean projection:
    /// the same offset is added to each tap), so the composed blur keeps the
    /// image's mean.
    pub fn project_unit_sum(&mut self) {
        for t in &mut self.layers {
            let sum: f64 = t.data().iter().map(|&v| v as f64).sum();
            let shift = (1.0 - sum) / t.numel() as f64;
            for v in t.data_mut() {
                *v = (*v as f64 + shift) as f32;
            }
        }
    }

    /// Removes each layer's mean gradient, leaving the component tangent to
    /// the unit-sum constraint. Without this an optimizer that normalizes
    /// per coordinate spends its step on the gain, which the projection then
    /// undoes.
    pub fn center_grads(&mut self) {
        for t in &mut self.layers {
            if let Some(g) = t.grad_mut() {
                let mean = g.iter().map(|&v| v as f64).sum::<f64>() / g.len() as f64;
                for v in g {
                    *v = (*v as f64 - mean) as f32;
                }
            }
        }
    }

    /// Layer tensors are recorded with gradients enabled when `trainable`.
    pub fn record(&self, tape: &mut Tape, trainable: bool) -> [Var; 3] {
        self.layers.each_ref().map(|t| {
            if trainable {
                tape.variable(t)
            } else {
                tape.constant(t)
            }
        })
    }
}

/// Every layer set to the unit-sum σ=1 Gaussian on its grid.
///
/// The generator is unused; the initialization is deterministic.
pub fn gd_init(scale: usize, _rng: &mut Rng) -> Result<GdNet> {
    let [a, b, c] = layer_extents(scale)?;
    GdNet::from_kernels(
        scale,
        [
            Kernel2D::gaussian(a, 1.0)?,
            Kernel2D::gaussian(b, 1.0)?,
            Kernel2D::gaussian(c, 1.0)?,
        ],
    )
}

/// Applies the network on a tape to `[C, H, W]` or `[B, C, H, W]` input.
///
/// `layers` are `[1, 1, k, k]` kernels applied in order to every channel;
/// any number works, so a single fixed kernel gives the reference
/// degradation.
pub fn gd_forward_tape<T: Scalar>(
    tape: &mut Tape<T>,
    layers: &[Var],
    scale: usize,
    x: Var,
) -> Result<Var> {
    let shape = tape.shape(x).to_vec();
    ensure!(
        shape.len() == 3 || shape.len() == 4,
        "degradation input must be [C, H, W] or [B, C, H, W], got {shape:?}"
    );
    let r = shape.len();
    let (h, w) = (shape[r - 2], shape[r - 1]);
    ensure!(
        h % scale == 0 && w % scale == 0,
        "input extent {h}x{w} is not divisible by scale {scale}"
    );
    let planes: usize = shape[..r - 2].iter().product();
    let mut v = tape.reshape(x, vec![planes, 1, h, w])?;
    for &k in layers {
        v = tape.conv2d(v, k, None, GD_PADDING, 1)?;
    }
    let v = tape.reshape(v, shape)?;
    tape.bicubic_resample(v, scale, Direction::Down)
}

/// Gradient-free forward pass.
pub fn gd_forward(net: &GdNet, x: &Tensor) -> Result<Tensor> {
    let mut tape = Tape::new();
    let layers = net.record(&mut tape, false);
    let xv = tape.constant(x);
    let y = gd_forward_tape(&mut tape, &layers, net.scale, xv)?;
    Ok(tape.tensor(y))
}

/// The blur the three layers apply, as a unit-sum correlation kernel.
///
/// A centred impulse on a zero field is pushed through the layers with zero
/// padding; the response is the kernel rotated by 180 degrees.
pub fn effective_kernel(net: &GdNet, support: usize) -> Result<Kernel2D> {
    ensure!(support % 2 == 1, "support must be odd, got {support}");
    let need = min_support(net.scale)?;
    ensure!(
        support >= need,
        "support {support} truncates the composed kernel, need at least {need}"
    );
    let mut field = Tensor::<f64>::zeros(vec![1, 1, support, support]);
    field.data_mut()[(support / 2) * support + support / 2] = 1.0;
    for layer in &net.layers {
        field = conv2d(&field, &layer.cast::<f64>(), None, Padding::Zero, 1)?;
    }
    let response = Kernel2D::new(support, field.into_data())?;
    let k = response.flipped();
    if k.sum().abs() > 1e-12 {
        k.normalized()
    } else {
        Ok(k)
    }
}

/// Downscales without blur; what the network reduces to with delta layers.
pub fn bicubic_down(x: &Tensor, scale: usize) -> Result<Tensor> {
    bicubic_resample(x, scale, Direction::Down)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deltas(scale: usize) -> GdNet {
        let e = layer_extents(scale).unwrap();
        GdNet::from_kernels(scale, e.map(|s| Kernel2D::delta(s).unwrap())).unwrap()
    }

    #[test]
    fn extents_per_scale() {
        assert_eq!(layer_extents(2).unwrap(), [3, 7, 9]);
        assert_eq!(layer_extents(4).unwrap(), [9, 15, 17]);
        assert!(layer_extents(3).is_err());
        let net = gd_init(4, &mut Rng::new(0)).unwrap();
        let sizes: Vec<usize> = (0..3).map(|i| net.layer_kernel(i).size()).collect();
        assert_eq!(sizes, vec![9, 15, 17]);
    }

    #[test]
    fn delta_layers_reduce_to_bicubic() {
        let x = Tensor::from_vec(vec![3, 16, 16], (0..768).map(|i| (i % 17) as f32 / 17.0).collect()).unwrap();
        let y = gd_forward(&deltas(2), &x).unwrap();
        assert_eq!(y, bicubic_down(&x, 2).unwrap());
        let k = effective_kernel(&deltas(2), 17).unwrap();
        assert_eq!(k, Kernel2D::delta(17).unwrap());
    }

    #[test]
    fn initialized_net_keeps_constants() {
        let net = gd_init(2, &mut Rng::new(0)).unwrap();
        let x = Tensor::full(vec![3, 32, 32], 0.4f32);
        let y = gd_forward(&net, &x).unwrap();
        assert_eq!(y.shape(), &[3, 16, 16]);
        assert!(y.data().iter().all(|v| (v - 0.4).abs() < 1e-6));
    }

    #[test]
    fn small_support_rejected() {
        let net = gd_init(2, &mut Rng::new(0)).unwrap();
        assert!(effective_kernel(&net, 15).is_err());
        assert!(effective_kernel(&net, 18).is_err());
        assert!(effective_kernel(&net, 17).is_ok());
    }

    #[test]
    fn params_round_trip() {
        let net = gd_init(4, &mut Rng::new(0)).unwrap();
        assert_eq!(GdNet::from_params(&net.to_params()).unwrap(), net);
    }
}
