//! Blind adaptation to one synthetic observation: the degradation network
//! and the reconstructor are updated alternately and scored every few steps.
//!
//! Usage: `online_adapt [steps] [init.bin]`. Without an init the
//! reconstructor starts from a short bicubic pretraining.

use onsr::degradation::{degrade, ncc, synth_kernel, DegradationSpec, SynthOptions};
use onsr::imaging::{synthetic, Rng, Stream};
use onsr::models::{gr_init, GrConfig, ModelParams};
use onsr::trainer::{online_adapt, pretrain_gr, PretrainConfig, TrainConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let steps = args.first().map_or(30, |s| s.parse().unwrap());
    let pool = synthetic::scene_set(99, 8, 128, 128).unwrap();
    let (cfg, gr) = match args.get(1) {
        Some(p) => {
            let params = ModelParams::load(p.as_ref()).unwrap();
            (GrConfig::infer(&params).unwrap(), params)
        }
        None => {
            let cfg = GrConfig::lite(2);
            let init = gr_init(&cfg, &Rng::new(1)).unwrap();
            let pcfg = PretrainConfig { steps: 60, n_patches: 4, lr_patch: 24, lr: 4e-4, seed: 0 };
            (cfg, pretrain_gr(&pool, &cfg, init, &pcfg).unwrap().params)
        }
    };
    let hr = synthetic::scene_set(500, 1, 96, 96).unwrap().remove(0);
    let rng = Rng::new(8);
    let (kernel, _) = synth_kernel(&mut rng.substream(Stream::Kernel), SynthOptions::for_scale(cfg.scale)).unwrap();
    let lr = degrade(&hr, &DegradationSpec::new(kernel.clone(), cfg.scale, 0.0).unwrap(), &mut rng.substream(Stream::Noise)).unwrap();

    let tcfg = TrainConfig { steps, test_interval: 10, n_patches: 4, seed: 2, ..Default::default() };
    let out = online_adapt(&lr, &pool, cfg, gr, tcfg, Some(&hr)).unwrap();
    for c in &out.checkpoints {
        println!("step {:>4}: PSNR {:.3} dB, SSIM {:.4}", c.step, c.psnr.unwrap(), c.ssim.unwrap());
    }
    println!(
        "final PSNR {:.3} dB; kernel NCC with ground truth {:.3}",
        out.psnr_final.unwrap(),
        ncc(&out.kernel_estimate, &kernel).unwrap()
    );
}
