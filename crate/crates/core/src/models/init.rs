use rand_distr::{Distribution, Normal};

use crate::imaging::Rng;
use crate::numcore::{Tensor, LEAKY_SLOPE};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitKind {
    Zero,
    /// Normal with the leaky-ReLU fan-in standard deviation times `gain`.
    He { gain: f64 },
}

/// Target standard deviation of fan-in init for a weight shape
/// (`[out, in, kh, kw]` or `[out, in]`).
pub fn he_std(shape: &[usize]) -> f64 {
    let fan_in: usize = shape[1..].iter().product();
    (2.0 / (1.0 + LEAKY_SLOPE * LEAKY_SLOPE)).sqrt() / (fan_in as f64).sqrt()
}

pub fn fill_he(shape: &[usize], kind: InitKind, rng: &mut Rng) -> Tensor {
    let n: usize = shape.iter().product();
    match kind {
        InitKind::Zero => Tensor::zeros(shape.to_vec()),
        InitKind::He { gain } => {
            let normal = Normal::new(0.0, gain * he_std(shape)).expect("finite std");
            let data = (0..n).map(|_| normal.sample(rng) as f32).collect();
            Tensor::from_vec(shape.to_vec(), data).expect("shape")
        }
    }
}
