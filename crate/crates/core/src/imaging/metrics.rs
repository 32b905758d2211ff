//! Full-reference quality metrics on `[0, 1]` images.

use super::ImageBuf;
use crate::error::{ensure, Result};

/// PSNR reported for (numerically) identical images.
pub const PSNR_CAP: f64 = 100.0;
const MSE_FLOOR: f64 = 1e-10;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Where and on what the metrics are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MetricOptions {
    /// Pixels dropped from every side before scoring.
    pub border_crop: usize,
    /// Score the BT.601 luma plane instead of the RGB channels.
    pub luma: bool,
}

impl MetricOptions {
    pub fn new(border_crop: usize, luma: bool) -> Self {
        Self { border_crop, luma }
    }

    pub fn mode_label(&self) -> &'static str {
        if self.luma {
            "luma"
        } else {
            "rgb"
        }
    }
}

/// Channel planes (in `f64`) that the metrics look at.
fn scored_planes(img: &ImageBuf, opts: MetricOptions) -> Result<(usize, usize, Vec<Vec<f64>>)> {
    let b = opts.border_crop;
    ensure!(
        2 * b < img.height() && 2 * b < img.width(),
        "border crop {b} leaves nothing of a {}x{} image",
        img.height(),
        img.width()
    );
    let (h, w) = (img.height() - 2 * b, img.width() - 2 * b);
    let plane = |c: usize| -> Vec<f64> {
        let mut v = Vec::with_capacity(h * w);
        for y in b..b + h {
            for x in b..b + w {
                v.push(img.get(c, y, x) as f64);
            }
        }
        v
    };
    let planes = if opts.luma && img.channels() == 3 {
        let (r, g, bl) = (plane(0), plane(1), plane(2));
        vec![r
            .iter()
            .zip(&g)
            .zip(&bl)
            .map(|((r, g), b)| luma(*r, *g, *b))
            .collect()]
    } else {
        (0..img.channels()).map(plane).collect()
    };
    Ok((h, w, planes))
}

/// BT.601 studio-range luma of an RGB triple in `[0, 1]`.
pub fn luma(r: f64, g: f64, b: f64) -> f64 {
    (16.0 + 65.481 * r + 128.553 * g + 24.966 * b) / 255.0
}

fn check_shapes(a: &ImageBuf, b: &ImageBuf) -> Result<()> {
    ensure!(
        a.same_shape(b),
        "metric inputs differ in shape: {}x{}x{} vs {}x{}x{}",
        a.channels(),
        a.height(),
        a.width(),
        b.channels(),
        b.height(),
        b.width()
    );
    Ok(())
}

pub fn mse(a: &ImageBuf, b: &ImageBuf, opts: MetricOptions) -> Result<f64> {
    check_shapes(a, b)?;
    let (_, _, pa) = scored_planes(a, opts)?;
    let (_, _, pb) = scored_planes(b, opts)?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (x, y) in pa.iter().zip(&pb) {
        for (u, v) in x.iter().zip(y) {
            sum += (u - v) * (u - v);
        }
        n += x.len();
    }
    Ok(sum / n as f64)
}

/// Peak signal-to-noise ratio in dB for peak value 1.
pub fn psnr(a: &ImageBuf, b: &ImageBuf, border_crop: usize) -> Result<f64> {
    psnr_with(a, b, MetricOptions::new(border_crop, false))
}

pub fn psnr_with(a: &ImageBuf, b: &ImageBuf, opts: MetricOptions) -> Result<f64> {
    let m = mse(a, b, opts)?;
    Ok(if m < MSE_FLOOR {
        PSNR_CAP
    } else {
        -10.0 * m.log10()
    })
}

/// Mean SSIM over channels without border crop.
pub fn ssim(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    ssim_with(a, b, MetricOptions::default())
}

pub fn ssim_with(a: &ImageBuf, b: &ImageBuf, opts: MetricOptions) -> Result<f64> {
    check_shapes(a, b)?;
    let (h, w, pa) = scored_planes(a, opts)?;
    let (_, _, pb) = scored_planes(b, opts)?;
    ensure!(
        h >= SSIM_WINDOW && w >= SSIM_WINDOW,
        "scored region {h}x{w} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
    );
    let win = gaussian_window();
    let total: f64 = pa
        .iter()
        .zip(&pb)
        .map(|(x, y)| ssim_plane(x, y, h, w, &win))
        .sum();
    Ok(total / pa.len() as f64)
}

fn gaussian_window() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as f64;
    let g: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

/// Separable "valid" Gaussian filtering.
fn filter_valid(p: &[f64], h: usize, w: usize, win: &[f64]) -> Vec<f64> {
    let k = win.len();
    let (ho, wo) = (h - k + 1, w - k + 1);
    let mut tmp = vec![0.0; h * wo];
    for y in 0..h {
        let row = &p[y * w..(y + 1) * w];
        for x in 0..wo {
            tmp[y * wo + x] = win.iter().zip(&row[x..x + k]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ho * wo];
    for y in 0..ho {
        for (i, &g) in win.iter().enumerate() {
            let src = &tmp[(y + i) * wo..(y + i + 1) * wo];
            for (o, s) in out[y * wo..(y + 1) * wo].iter_mut().zip(src) {
                *o += g * s;
            }
        }
    }
    out
}

fn ssim_plane(a: &[f64], b: &[f64], h: usize, w: usize, win: &[f64]) -> f64 {
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let prod = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
        a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
    };
    let mu_a = filter_valid(a, h, w, win);
    let mu_b = filter_valid(b, h, w, win);
    let e_aa = filter_valid(&prod(&|x, _| x * x), h, w, win);
    let e_bb = filter_valid(&prod(&|_, y| y * y), h, w, win);
    let e_ab = filter_valid(&prod(&|x, y| x * y), h, w, win);
    let mut sum = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = e_aa[i] - ma * ma;
        let vb = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    sum / mu_a.len() as f64
}
