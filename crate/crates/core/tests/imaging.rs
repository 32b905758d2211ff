mod common;

use std::fs::File;
use std::io::BufWriter;

use common::oracle;
use onsr::imaging::{load_png, psnr, sample_offsets, sample_patches, save_png, ssim, ImageBuf, Rng};
use onsr::Error;
use proptest::prelude::*;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(seed: u64, c: usize, h: usize, w: usize, hi: f32) -> ImageBuf {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    ImageBuf::new(c, h, w, (0..c * h * w).map(|_| r.random_range(0.0..hi)).collect()).unwrap()
}

fn write_png(path: &std::path::Path, w: u32, h: u32, color: png::ColorType, depth: png::BitDepth, data: &[u8], palette: Option<Vec<u8>>) {
    let mut enc = png::Encoder::new(BufWriter::new(File::create(path).unwrap()), w, h);
    enc.set_color(color);
    enc.set_depth(depth);
    if let Some(p) = palette {
        enc.set_palette(p);
    }
    enc.write_header().unwrap().write_image_data(data).unwrap();
}

#[test]
fn png_round_trip_is_exact_on_the_255_grid() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for c in [1, 3] {
        let px: Vec<f32> = (0..c * 9 * 12).map(|_| r.random_range(0..=255u8) as f32 / 255.0).collect();
        let img = ImageBuf::new(c, 9, 12, px).unwrap();
        let path = dir.path().join(format!("c{c}.png"));
        save_png(&img, &path).unwrap();
        assert_eq!(load_png(&path).unwrap(), img);
    }
}

#[test]
fn sixteen_bit_gray_loads_to_unit_range() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g16.png");
    let vals: Vec<u16> = (0..64).map(|i| (i * 1040) as u16).collect();
    let bytes: Vec<u8> = vals.iter().flat_map(|v| v.to_be_bytes()).collect();
    write_png(&path, 8, 8, png::ColorType::Grayscale, png::BitDepth::Sixteen, &bytes, None);
    let img = load_png(&path).unwrap();
    assert_eq!(img.channels(), 1);
    for (p, v) in img.pixels().iter().zip(&vals) {
        assert!((*p as f64 - *v as f64 / 65535.0).abs() < 1e-6);
    }
}

#[test]
fn palette_png_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pal.png");
    write_png(&path, 8, 8, png::ColorType::Indexed, png::BitDepth::Eight, &[0u8; 64], Some(vec![0, 0, 0]));
    assert!(matches!(load_png(&path), Err(Error::UnsupportedImage { .. })));
}

#[test]
fn patch_protocol_on_96() {
    let img = ImageBuf::filled(3, 96, 96, 0.5).unwrap();
    let a = sample_offsets(96, 96, 10, 32, &mut Rng::new(4)).unwrap();
    let b = sample_offsets(96, 96, 10, 32, &mut Rng::new(4)).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|&(y, x)| y <= 64 && x <= 64));
    assert_eq!(sample_patches(&img, 10, 32, &mut Rng::new(4)).unwrap().len(), 10);
    let whole = sample_patches(&img, 3, 96, &mut Rng::new(0)).unwrap();
    assert!(whole.iter().all(|p| (p.y, p.x) == (0, 0) && p.image == img));
}

#[test]
fn psnr_of_a_tenth_offset_is_twenty() {
    let a = random_image(2, 3, 24, 24, 0.9);
    let b = ImageBuf::new(3, 24, 24, a.pixels().iter().map(|v| v + 0.1).collect()).unwrap();
    assert!((psnr(&a, &b, 0).unwrap() - 20.0).abs() <= 1e-6);
    assert_eq!(psnr(&a, &a, 0).unwrap(), 100.0);
}

#[test]
fn psnr_matches_the_formula() {
    for seed in 0..10 {
        let a = random_image(seed, 3, 20, 17, 1.0);
        let b = random_image(seed + 100, 3, 20, 17, 1.0);
        for border in [0, 3] {
            let mut se = 0.0;
            let mut n = 0.0;
            for c in 0..3 {
                for y in border..20 - border {
                    for x in border..17 - border {
                        se += (a.get(c, y, x) as f64 - b.get(c, y, x) as f64).powi(2);
                        n += 1.0;
                    }
                }
            }
            let want = 10.0 * (1.0 / (se / n)).log10();
            assert!((psnr(&a, &b, border).unwrap() - want).abs() <= 1e-9);
        }
    }
}

/// SSIM with a full 2-D Gaussian window, evaluated window by window.
fn ssim_direct(a: &ImageBuf, b: &ImageBuf) -> f64 {
    let g = oracle::gaussian(11, 1.5);
    let (c1, c2) = (1e-4, 9e-4);
    let (h, w) = (a.height(), a.width());
    let mut total = 0.0;
    for c in 0..a.channels() {
        let mut acc = 0.0;
        for y0 in 0..=h - 11 {
            for x0 in 0..=w - 11 {
                let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for i in 0..11 {
                    for j in 0..11 {
                        let wt = g.at(i, j);
                        let (p, q) = (a.get(c, y0 + i, x0 + j) as f64, b.get(c, y0 + i, x0 + j) as f64);
                        ma += wt * p;
                        mb += wt * q;
                        saa += wt * p * p;
                        sbb += wt * q * q;
                        sab += wt * p * q;
                    }
                }
                let (va, vb, cov) = (saa - ma * ma, sbb - mb * mb, sab - ma * mb);
                acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            }
        }
        total += acc / ((h - 10) * (w - 10)) as f64;
    }
    total / a.channels() as f64
}

#[test]
fn ssim_units_and_oracle() {
    let x = random_image(7, 3, 16, 19, 1.0);
    assert!((ssim(&x, &x).unwrap() - 1.0).abs() <= 1e-9);
    let a = ImageBuf::filled(1, 16, 16, 0.2).unwrap();
    let b = ImageBuf::filled(1, 16, 16, 0.4).unwrap();
    let want = oracle::constant_ssim(0.2f32 as f64, 0.4f32 as f64);
    assert!((ssim(&a, &b).unwrap() - want).abs() <= 1e-6);
    assert!((want - 0.80010).abs() < 5e-5);
    for seed in 0..3 {
        let p = random_image(seed, 3, 14, 15, 1.0);
        let q = random_image(seed + 9, 3, 14, 15, 1.0);
        assert!((ssim(&p, &q).unwrap() - ssim_direct(&p, &q)).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ssim_is_symmetric(seed in any::<u64>()) {
        let a = random_image(seed, 3, 13, 12, 1.0);
        let b = random_image(seed ^ 1, 3, 13, 12, 1.0);
        prop_assert!((ssim(&a, &b).unwrap() - ssim(&b, &a).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn offsets_always_fit(h in 8usize..64, w in 8usize..64, size in 8usize..32, seed in any::<u64>()) {
        prop_assume!(size <= h && size <= w);
        let offs = sample_offsets(h, w, 5, size, &mut Rng::new(seed)).unwrap();
        prop_assert!(offs.iter().all(|&(y, x)| y + size <= h && x + size <= w));
    }
}
