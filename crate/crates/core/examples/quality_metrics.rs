//! PSNR and SSIM of progressively blurred copies of a scene, in RGB and
//! luma mode.

use onsr::degradation::{blur, Kernel2D};
use onsr::imaging::{psnr_with, ssim_with, synthetic, ImageBuf, MetricOptions};

fn main() {
    let gt = synthetic::scene_set(4, 1, 96, 96).unwrap().remove(0);
    for sigma in [0.5, 1.0, 2.0] {
        let k = Kernel2D::gaussian(13, sigma).unwrap();
        let img = ImageBuf::from_tensor(&blur(&gt.to_tensor(), &k).unwrap(), true).unwrap();
        for luma in [false, true] {
            let opts = MetricOptions::new(4, luma);
            println!(
                "sigma {sigma}: {:>4} PSNR {:.2} dB, SSIM {:.4}",
                opts.mode_label(),
                psnr_with(&img, &gt, opts).unwrap(),
                ssim_with(&img, &gt, opts).unwrap()
            );
        }
    }
}
