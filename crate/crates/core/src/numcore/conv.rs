//! 2-D cross-correlation over `[C, H, W]` or batched `[B, C, H, W]` inputs.
//!
//! Everything here is *correlation*: `out[y][x] = Σ w[ky][kx] · in[y+ky-p][x+kx-p]`.
//! The kernel is never flipped, so a kernel learned by one conv stack can be
//! compared tap-for-tap with a kernel applied by another.

use super::scalar::matmul;
use super::{Scalar, Tensor};
use crate::error::{ensure, Result};

/// Border handling for same-size convolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Padding {
    Zero,
    /// Mirror without repeating the edge sample (`-1 → 1`).
    Reflect,
}

#[derive(Clone, Debug)]
pub(crate) struct ConvGeometry {
    pub batch: usize,
    pub batched: bool,
    pub cin: usize,
    pub h: usize,
    pub w: usize,
    pub cout: usize,
    pub kh: usize,
    pub kw: usize,
    pub hout: usize,
    pub wout: usize,
    stride: usize,
    /// `ytab[oy * kh + ky]` is the source row, or `usize::MAX` for a zero tap.
    ytab: Vec<usize>,
    xtab: Vec<usize>,
}

const ZERO_TAP: usize = usize::MAX;

impl ConvGeometry {
    pub fn new(
        input: &[usize],
        weight: &[usize],
        padding: Padding,
        stride: usize,
    ) -> Result<Self> {
        ensure!(stride >= 1, "conv2d stride must be >= 1");
        let (batch, batched, cin, h, w) = match *input {
            [c, h, w] => (1, false, c, h, w),
            [b, c, h, w] => (b, true, c, h, w),
            _ => return Err(crate::error::contract!("conv2d input must be rank 3 or 4, got {:?}", input)),
        };
        let [cout, wcin, kh, kw] = *weight else {
            return Err(crate::error::contract!("conv2d weight must be rank 4, got {:?}", weight));
        };
        ensure!(
            wcin == cin,
            "conv2d weight expects {} input channels, input has {}",
            wcin,
            cin
        );
        ensure!(
            kh % 2 == 1 && kw % 2 == 1,
            "conv2d kernel extents must be odd, got {kh}x{kw}"
        );
        let (ph, pw) = (kh / 2, kw / 2);
        ensure!(h >= 1 && w >= 1, "conv2d on empty input {:?}", input);
        if padding == Padding::Reflect {
            ensure!(
                ph < h && pw < w,
                "reflect padding of {ph}x{pw} needs input larger than {h}x{w}"
            );
        }
        let hout = (h + 2 * ph - kh) / stride + 1;
        let wout = (w + 2 * pw - kw) / stride + 1;
        Ok(Self {
            batch,
            batched,
            cin,
            h,
            w,
            cout,
            kh,
            kw,
            hout,
            wout,
            stride,
            ytab: tap_table(h, kh, ph, stride, hout, padding),
            xtab: tap_table(w, kw, pw, stride, wout, padding),
        })
    }

    pub fn out_shape(&self) -> Vec<usize> {
        if self.batched {
            vec![self.batch, self.cout, self.hout, self.wout]
        } else {
            vec![self.cout, self.hout, self.wout]
        }
    }

    fn k(&self) -> usize {
        self.cin * self.kh * self.kw
    }

    fn n(&self) -> usize {
        self.hout * self.wout
    }

    /// Output columns `lo..hi` whose tap `kx` reads the in-range source
    /// samples `start..start + hi - lo` (stride 1 only).
    fn contiguous_span(&self, kx: usize) -> Option<(usize, usize, usize)> {
        if self.stride != 1 {
            return None;
        }
        let p = self.kw / 2;
        let lo = p.saturating_sub(kx);
        let hi = self.wout.min((self.w + p).saturating_sub(kx));
        (lo < hi).then(|| (lo, hi, lo + kx - p))
    }

    fn spans(&self) -> Vec<Option<(usize, usize, usize)>> {
        (0..self.kw).map(|kx| self.contiguous_span(kx)).collect()
    }

    fn im2col<T: Scalar>(&self, input: &[T], cols: &mut [T]) {
        let n = self.n();
        let spans = self.spans();
        for ci in 0..self.cin {
            let plane = &input[ci * self.h * self.w..(ci + 1) * self.h * self.w];
            for ky in 0..self.kh {
                for kx in 0..self.kw {
                    let row = ((ci * self.kh + ky) * self.kw + kx) * n;
                    let dst = &mut cols[row..row + n];
                    for oy in 0..self.hout {
                        let sy = self.ytab[oy * self.kh + ky];
                        let out_row = &mut dst[oy * self.wout..(oy + 1) * self.wout];
                        if sy == ZERO_TAP {
                            out_row.iter_mut().for_each(|v| *v = T::zero());
                            continue;
                        }
                        let src = &plane[sy * self.w..(sy + 1) * self.w];
                        let (lo, hi) = match spans[kx] {
                            Some((lo, hi, start)) => {
                                out_row[lo..hi].copy_from_slice(&src[start..start + hi - lo]);
                                (lo, hi)
                            }
                            None => (0, 0),
                        };
                        for ox in (0..lo).chain(hi..self.wout) {
                            let sx = self.xtab[ox * self.kw + kx];
                            out_row[ox] = if sx == ZERO_TAP { T::zero() } else { src[sx] };
                        }
                    }
                }
            }
        }
    }

    fn col2im_add<T: Scalar>(&self, cols: &[T], grad_input: &mut [T]) {
        let n = self.n();
        let spans = self.spans();
        for ci in 0..self.cin {
            let plane = &mut grad_input[ci * self.h * self.w..(ci + 1) * self.h * self.w];
            for ky in 0..self.kh {
                for kx in 0..self.kw {
                    let row = ((ci * self.kh + ky) * self.kw + kx) * n;
                    let src = &cols[row..row + n];
                    for oy in 0..self.hout {
                        let sy = self.ytab[oy * self.kh + ky];
                        if sy == ZERO_TAP {
                            continue;
                        }
                        let dst = &mut plane[sy * self.w..(sy + 1) * self.w];
                        let g = &src[oy * self.wout..(oy + 1) * self.wout];
                        let (lo, hi) = match spans[kx] {
                            Some((lo, hi, start)) => {
                                for (d, &v) in dst[start..start + hi - lo].iter_mut().zip(&g[lo..hi]) {
                                    *d = *d + v;
                                }
                                (lo, hi)
                            }
                            None => (0, 0),
                        };
                        for ox in (0..lo).chain(hi..self.wout) {
                            let sx = self.xtab[ox * self.kw + kx];
                            if sx != ZERO_TAP {
                                dst[sx] = dst[sx] + g[ox];
                            }
                        }
                    }
                }
            }
        }
    }
}

fn tap_table(
    len: usize,
    k: usize,
    pad: usize,
    stride: usize,
    out_len: usize,
    padding: Padding,
) -> Vec<usize> {
    let mut tab = Vec::with_capacity(out_len * k);
    for o in 0..out_len {
        for t in 0..k {
            let i = (o * stride + t) as isize - pad as isize;
            let idx = if (0..len as isize).contains(&i) {
                i as usize
            } else {
                match padding {
                    Padding::Zero => ZERO_TAP,
                    Padding::Reflect if i < 0 => (-i) as usize,
                    Padding::Reflect => (2 * (len as isize - 1) - i) as usize,
                }
            };
            tab.push(idx);
        }
    }
    tab
}

/// Gradient-free convolution.
pub fn conv2d<T: Scalar>(
    input: &Tensor<T>,
    weight: &Tensor<T>,
    bias: Option<&Tensor<T>>,
    padding: Padding,
    stride: usize,
) -> Result<Tensor<T>> {
    let geom = ConvGeometry::new(input.shape(), weight.shape(), padding, stride)?;
    if let Some(b) = bias {
        ensure!(
            b.numel() == geom.cout,
            "conv2d bias has {} entries for {} output channels",
            b.numel(),
            geom.cout
        );
    }
    let out = forward(&geom, input.data(), weight.data(), bias.map(|b| b.data()));
    Tensor::from_vec(geom.out_shape(), out)
}

pub(crate) fn forward<T: Scalar>(
    geom: &ConvGeometry,
    input: &[T],
    weight: &[T],
    bias: Option<&[T]>,
) -> Vec<T> {
    let (k, n) = (geom.k(), geom.n());
    let in_per = geom.cin * geom.h * geom.w;
    let out_per = geom.cout * n;
    let mut out = vec![T::zero(); geom.batch * out_per];
    let mut cols = vec![T::zero(); k * n];
    for b in 0..geom.batch {
        geom.im2col(&input[b * in_per..(b + 1) * in_per], &mut cols);
        let dst = &mut out[b * out_per..(b + 1) * out_per];
        matmul(geom.cout, k, n, weight, false, &cols, false, dst, false);
        if let Some(bias) = bias {
            for (co, &bv) in bias.iter().enumerate() {
                dst[co * n..(co + 1) * n].iter_mut().for_each(|v| *v = *v + bv);
            }
        }
    }
    out
}

pub(crate) struct ConvGrads<T> {
    pub input: Option<Vec<T>>,
    pub weight: Option<Vec<T>>,
    pub bias: Option<Vec<T>>,
}

pub(crate) fn backward<T: Scalar>(
    geom: &ConvGeometry,
    input: &[T],
    weight: &[T],
    grad_out: &[T],
    want: (bool, bool, bool),
) -> ConvGrads<T> {
    let (want_input, want_weight, want_bias) = want;
    let (k, n) = (geom.k(), geom.n());
    let in_per = geom.cin * geom.h * geom.w;
    let out_per = geom.cout * n;
    let mut g_in = want_input.then(|| vec![T::zero(); geom.batch * in_per]);
    let mut g_w = want_weight.then(|| vec![T::zero(); weight.len()]);
    let mut g_b = want_bias.then(|| vec![T::zero(); geom.cout]);
    let mut cols = vec![T::zero(); k * n];
    for b in 0..geom.batch {
        let go = &grad_out[b * out_per..(b + 1) * out_per];
        if let Some(gw) = g_w.as_mut() {
            geom.im2col(&input[b * in_per..(b + 1) * in_per], &mut cols);
            // dW[cout×k] += dOut[cout×n] · cols[k×n]ᵀ
            matmul(geom.cout, n, k, go, false, &cols, true, gw, true);
        }
        if let Some(gi) = g_in.as_mut() {
            // dCols[k×n] = Wᵀ[k×cout] · dOut[cout×n]
            matmul(k, geom.cout, n, weight, true, go, false, &mut cols, false);
            geom.col2im_add(&cols, &mut gi[b * in_per..(b + 1) * in_per]);
        }
        if let Some(gb) = g_b.as_mut() {
            for (co, acc) in gb.iter_mut().enumerate() {
                *acc = *acc + go[co * n..(co + 1) * n].iter().copied().sum::<T>();
            }
        }
    }
    ConvGrads {
        input: g_in,
        weight: g_w,
        bias: g_b,
    }
}
