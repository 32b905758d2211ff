//! Separable bicubic resampling with the Keys cubic-convolution kernel.
//!
//! Downsampling widens the kernel by the scale factor (antialiasing, as in
//! MATLAB's `imresize`), upsampling interpolates with the plain kernel.
//! Sample centres follow the half-pixel convention, indices outside the image
//! clamp to the nearest edge pixel, and every output's weights are normalized
//! to sum to one.

use std::sync::Arc;

use super::{Scalar, Tensor};
use crate::error::{ensure, Result};

/// Keys parameter; `-0.5` reproduces polynomials up to degree two.
pub const KEYS_A: f64 = -0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
}

/// Keys cubic-convolution kernel.
pub fn cubic(t: f64) -> f64 {
    let a = KEYS_A;
    let t = t.abs();
    if t <= 1.0 {
        ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a
    } else {
        0.0
    }
}

/// Sparse row-stochastic matrix mapping one axis of length `in_len` to `out_len`.
#[derive(Clone, Debug)]
pub struct AxisPlan {
    pub in_len: usize,
    pub out_len: usize,
    offsets: Vec<usize>,
    index: Vec<usize>,
    weight: Vec<f64>,
}

impl AxisPlan {
    pub fn new(in_len: usize, factor: usize, direction: Direction) -> Result<Self> {
        ensure!(factor >= 1, "resample factor must be >= 1");
        ensure!(in_len >= 1, "resample of an empty axis");
        let (out_len, kernel_scale) = match direction {
            Direction::Down => {
                ensure!(
                    in_len % factor == 0,
                    "extent {in_len} is not divisible by downsampling factor {factor}"
                );
                (in_len / factor, factor as f64)
            }
            Direction::Up => (in_len * factor, 1.0),
        };
        let mut offsets = Vec::with_capacity(out_len + 1);
        let mut index = Vec::new();
        let mut weight = Vec::new();
        offsets.push(0);
        let support = 2.0 * kernel_scale;
        for o in 0..out_len {
            let centre = match direction {
                Direction::Down => (o as f64 + 0.5) * factor as f64 - 0.5,
                Direction::Up => (o as f64 + 0.5) / factor as f64 - 0.5,
            };
            let lo = (centre - support).floor() as i64 + 1;
            let hi = (centre + support).ceil() as i64 - 1;
            let start = index.len();
            let mut total = 0.0;
            for j in lo..=hi {
                let w = cubic((centre - j as f64) / kernel_scale) / kernel_scale;
                if w == 0.0 {
                    continue;
                }
                total += w;
                let src = j.clamp(0, in_len as i64 - 1) as usize;
                // Clamped taps pile onto the edge sample.
                if let Some(pos) = index[start..].iter().position(|&s| s == src) {
                    weight[start + pos] += w;
                } else {
                    index.push(src);
                    weight.push(w);
                }
            }
            for w in &mut weight[start..] {
                *w /= total;
            }
            offsets.push(index.len());
        }
        Ok(Self {
            in_len,
            out_len,
            offsets,
            index,
            weight,
        })
    }

    /// `(source index, weight)` pairs for output `o`.
    pub fn taps(&self, o: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[o]..self.offsets[o + 1];
        self.index[r.clone()]
            .iter()
            .copied()
            .zip(self.weight[r].iter().copied())
    }
}

/// Both axis plans of one resampling operation.
#[derive(Clone, Debug)]
pub struct ResamplePlan {
    pub rows: Arc<AxisPlan>,
    pub cols: Arc<AxisPlan>,
}

impl ResamplePlan {
    pub fn new(h: usize, w: usize, factor: usize, direction: Direction) -> Result<Self> {
        Ok(Self {
            rows: Arc::new(AxisPlan::new(h, factor, direction)?),
            cols: Arc::new(AxisPlan::new(w, factor, direction)?),
        })
    }

    pub fn out_shape(&self, in_shape: &[usize]) -> Vec<usize> {
        let mut s = in_shape.to_vec();
        let r = s.len();
        s[r - 2] = self.rows.out_len;
        s[r - 1] = self.cols.out_len;
        s
    }

    pub(crate) fn forward<T: Scalar>(&self, input: &[T], planes: usize) -> Vec<T> {
        let (h, w) = (self.rows.in_len, self.cols.in_len);
        let (ho, wo) = (self.rows.out_len, self.cols.out_len);
        let cw = cast_weights::<T>(&self.cols);
        let rw = cast_weights::<T>(&self.rows);
        // Along x first, then along y.
        let mut tmp = vec![T::zero(); planes * h * wo];
        for r in 0..planes * h {
            let src = &input[r * w..(r + 1) * w];
            let dst = &mut tmp[r * wo..(r + 1) * wo];
            for (o, d) in dst.iter_mut().enumerate() {
                let mut acc = T::zero();
                for t in self.cols.offsets[o]..self.cols.offsets[o + 1] {
                    acc = acc + cw[t] * src[self.cols.index[t]];
                }
                *d = acc;
            }
        }
        let mut out = vec![T::zero(); planes * ho * wo];
        for p in 0..planes {
            let src = &tmp[p * h * wo..(p + 1) * h * wo];
            let dst = &mut out[p * ho * wo..(p + 1) * ho * wo];
            for o in 0..ho {
                let row = &mut dst[o * wo..(o + 1) * wo];
                for t in self.rows.offsets[o]..self.rows.offsets[o + 1] {
                    let (wt, s) = (rw[t], self.rows.index[t]);
                    for (d, &v) in row.iter_mut().zip(&src[s * wo..(s + 1) * wo]) {
                        *d = *d + wt * v;
                    }
                }
            }
        }
        out
    }

    /// Transpose of [`forward`](Self::forward).
    pub(crate) fn backward<T: Scalar>(&self, grad_out: &[T], planes: usize) -> Vec<T> {
        let (h, w) = (self.rows.in_len, self.cols.in_len);
        let (ho, wo) = (self.rows.out_len, self.cols.out_len);
        let cw = cast_weights::<T>(&self.cols);
        let rw = cast_weights::<T>(&self.rows);
        let mut tmp = vec![T::zero(); planes * h * wo];
        for p in 0..planes {
            let src = &grad_out[p * ho * wo..(p + 1) * ho * wo];
            let dst = &mut tmp[p * h * wo..(p + 1) * h * wo];
            for o in 0..ho {
                let g = &src[o * wo..(o + 1) * wo];
                for t in self.rows.offsets[o]..self.rows.offsets[o + 1] {
                    let (wt, s) = (rw[t], self.rows.index[t]);
                    for (d, &v) in dst[s * wo..(s + 1) * wo].iter_mut().zip(g) {
                        *d = *d + wt * v;
                    }
                }
            }
        }
        let mut grad_in = vec![T::zero(); planes * h * w];
        for r in 0..planes * h {
            let g = &tmp[r * wo..(r + 1) * wo];
            let dst = &mut grad_in[r * w..(r + 1) * w];
            for (o, &gv) in g.iter().enumerate() {
                for t in self.cols.offsets[o]..self.cols.offsets[o + 1] {
                    let s = self.cols.index[t];
                    dst[s] = dst[s] + cw[t] * gv;
                }
            }
        }
        grad_in
    }
}

fn cast_weights<T: Scalar>(plan: &AxisPlan) -> Vec<T> {
    plan.weight.iter().map(|&w| T::of_f64(w)).collect()
}

pub(crate) fn planes_of(shape: &[usize]) -> Result<usize> {
    ensure!(
        shape.len() >= 2,
        "resampling needs at least two spatial axes, got {:?}",
        shape
    );
    Ok(shape[..shape.len() - 2].iter().product())
}

/// Gradient-free resampling of the last two axes by an integer factor.
pub fn bicubic_resample<T: Scalar>(
    input: &Tensor<T>,
    factor: usize,
    direction: Direction,
) -> Result<Tensor<T>> {
    let shape = input.shape();
    let planes = planes_of(shape)?;
    let r = shape.len();
    let plan = ResamplePlan::new(shape[r - 2], shape[r - 1], factor, direction)?;
    Tensor::from_vec(plan.out_shape(shape), plan.forward(input.data(), planes))
}
