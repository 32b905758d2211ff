//! Slow, loop-level reference implementations used as test oracles.

use onsr::degradation::Kernel2D;
use onsr::numcore::{Padding, Tape, Tensor, Var};

/// Source index of tap `i` for padding `p`, `None` for a zero tap.
fn pad_index(i: i64, n: usize, padding: Padding) -> Option<usize> {
    let n = n as i64;
    match padding {
        Padding::Zero => (0..n).contains(&i).then_some(i as usize),
        Padding::Reflect => {
            let mut j = i;
            while !(0..n).contains(&j) {
                j = if j < 0 { -j } else { 2 * (n - 1) - j };
            }
            Some(j as usize)
        }
    }
}

/// Direct correlation: `out[b,o,y,x] = sum w[o,c,i,j] * in[b,c,y*s+i-p, x*s+j-p] + bias[o]`.
pub fn conv2d(
    input: &[f64],
    in_shape: [usize; 4],
    weight: &[f64],
    w_shape: [usize; 4],
    bias: Option<&[f64]>,
    padding: Padding,
    stride: usize,
) -> (Vec<f64>, [usize; 4]) {
    let [b, c, h, w] = in_shape;
    let [o, _, kh, kw] = w_shape;
    let (ph, pw) = (kh / 2, kw / 2);
    let ho = (h + 2 * ph - kh) / stride + 1;
    let wo = (w + 2 * pw - kw) / stride + 1;
    let mut out = vec![0.0; b * o * ho * wo];
    for bi in 0..b {
        for oi in 0..o {
            for y in 0..ho {
                for x in 0..wo {
                    let mut acc = bias.map_or(0.0, |bs| bs[oi]);
                    for ci in 0..c {
                        for i in 0..kh {
                            for j in 0..kw {
                                let sy = (y * stride + i) as i64 - ph as i64;
                                let sx = (x * stride + j) as i64 - pw as i64;
                                if let (Some(sy), Some(sx)) = (pad_index(sy, h, padding), pad_index(sx, w, padding)) {
                                    acc += weight[((oi * c + ci) * kh + i) * kw + j]
                                        * input[((bi * c + ci) * h + sy) * w + sx];
                                }
                            }
                        }
                    }
                    out[((bi * o + oi) * ho + y) * wo + x] = acc;
                }
            }
        }
    }
    (out, [b, o, ho, wo])
}

/// Keys cubic with a = -0.5, written out from its defining piecewise form.
pub fn keys(t: f64) -> f64 {
    let t = t.abs();
    let a = -0.5;
    if t < 1.0 {
        (a + 2.0) * t.powi(3) - (a + 3.0) * t.powi(2) + 1.0
    } else if t < 2.0 {
        a * t.powi(3) - 5.0 * a * t.powi(2) + 8.0 * a * t - 4.0 * a
    } else {
        0.0
    }
}

/// Dense `out_len × in_len` resampling matrix: half-pixel centres, kernel
/// stretched by the factor when shrinking, edge clamping, unit row sums.
pub fn resample_matrix(in_len: usize, factor: usize, down: bool) -> Vec<Vec<f64>> {
    let out_len = if down { in_len / factor } else { in_len * factor };
    let stretch = if down { factor as f64 } else { 1.0 };
    let mut m = vec![vec![0.0; in_len]; out_len];
    for (o, row) in m.iter_mut().enumerate() {
        let centre = if down {
            (o as f64 + 0.5) * factor as f64 - 0.5
        } else {
            (o as f64 + 0.5) / factor as f64 - 0.5
        };
        let reach = (2.0 * stretch).ceil() as i64 + 2;
        let base = centre.floor() as i64;
        for j in base - reach..=base + reach {
            let wgt = keys((centre - j as f64) / stretch);
            let src = j.clamp(0, in_len as i64 - 1) as usize;
            row[src] += wgt;
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= total);
    }
    m
}

/// `R · X · Cᵀ` on every `[h, w]` plane.
pub fn resample(input: &[f64], planes: usize, h: usize, w: usize, factor: usize, down: bool) -> Vec<f64> {
    let r = resample_matrix(h, factor, down);
    let c = resample_matrix(w, factor, down);
    let (ho, wo) = (r.len(), c.len());
    let mut out = vec![0.0; planes * ho * wo];
    for p in 0..planes {
        for y in 0..ho {
            for x in 0..wo {
                let mut acc = 0.0;
                for i in 0..h {
                    if r[y][i] == 0.0 {
                        continue;
                    }
                    for j in 0..w {
                        acc += r[y][i] * c[x][j] * input[(p * h + i) * w + j];
                    }
                }
                out[(p * ho + y) * wo + x] = acc;
            }
        }
    }
    out
}

/// Full 2-D convolution (output extent `a + b - 1`).
pub fn full_convolution(a: &Kernel2D, b: &Kernel2D) -> Kernel2D {
    let (na, nb) = (a.size(), b.size());
    let n = na + nb - 1;
    let mut taps = vec![0.0; n * n];
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    taps[(i + k) * n + j + l] += a.at(i, j) * b.at(k, l);
                }
            }
        }
    }
    Kernel2D::new(n, taps).unwrap()
}

/// Sampled, unit-sum isotropic Gaussian.
pub fn gaussian(size: usize, sigma: f64) -> Kernel2D {
    let c = (size / 2) as f64;
    let mut taps = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let (dy, dx) = (y as f64 - c, x as f64 - c);
            taps.push((-(dy * dy + dx * dx) / (2.0 * sigma * sigma)).exp());
        }
    }
    let s: f64 = taps.iter().sum();
    Kernel2D::new(size, taps.into_iter().map(|v| v / s).collect()).unwrap()
}

/// SSIM of two constant images `a` and `b` on `[0, 1]`: only the luminance
/// term survives.
pub fn constant_ssim(a: f64, b: f64) -> f64 {
    let c1 = (0.01f64).powi(2);
    (2.0 * a * b + c1) / (a * a + b * b + c1)
}

/// Worst relative error between the tape gradient and central differences
/// of `f` for every input element. Relative error uses
/// `|g - fd| / max(1, |g|, |fd|)`.
pub fn gradcheck(
    inputs: &[Tensor<f64>],
    f: &dyn Fn(&mut Tape<f64>, &[Var]) -> Var,
    h: f64,
) -> f64 {
    let eval = |xs: &[Tensor<f64>]| -> f64 {
        let mut tape = Tape::new();
        let vars: Vec<Var> = xs.iter().map(|x| tape.constant(x)).collect();
        let out = f(&mut tape, &vars);
        tape.item(out).unwrap()
    };
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|x| tape.variable(x)).collect();
    let out = f(&mut tape, &vars);
    let grads = tape.backward(out).unwrap();
    let mut worst = 0.0f64;
    for (k, (x, &v)) in inputs.iter().zip(&vars).enumerate() {
        let g = grads.get(v).map(|g| g.to_vec()).unwrap_or_else(|| vec![0.0; x.numel()]);
        for i in 0..x.numel() {
            let mut plus = inputs.to_vec();
            plus[k].data_mut()[i] += h;
            let mut minus = inputs.to_vec();
            minus[k].data_mut()[i] -= h;
            let fd = (eval(&plus) - eval(&minus)) / (2.0 * h);
            let err = (g[i] - fd).abs() / 1f64.max(g[i].abs()).max(fd.abs());
            worst = worst.max(err);
        }
    }
    worst
}
