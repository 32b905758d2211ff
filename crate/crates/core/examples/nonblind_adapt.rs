//! Adaptation with the true kernel supplied: only the reconstructor learns.

use onsr::degradation::{degrade, synth_kernel, DegradationSpec, SynthOptions};
use onsr::imaging::{synthetic, Rng, Stream};
use onsr::models::{gr_init, GrConfig};
use onsr::trainer::{nonblind_adapt, pretrain_gr, PretrainConfig, TrainConfig};

fn main() {
    let pool = synthetic::scene_set(99, 8, 128, 128).unwrap();
    let cfg = GrConfig::lite(2);
    let init = gr_init(&cfg, &Rng::new(1)).unwrap();
    let pcfg = PretrainConfig { steps: 60, n_patches: 4, lr_patch: 24, lr: 4e-4, seed: 0 };
    let gr = pretrain_gr(&pool, &cfg, init, &pcfg).unwrap().params;

    let hr = synthetic::scene_set(501, 1, 96, 96).unwrap().remove(0);
    let rng = Rng::new(9);
    let (kernel, _) = synth_kernel(&mut rng.substream(Stream::Kernel), SynthOptions::for_scale(2)).unwrap();
    let lr = degrade(&hr, &DegradationSpec::new(kernel.clone(), 2, 0.0).unwrap(), &mut rng.substream(Stream::Noise)).unwrap();

    let tcfg = TrainConfig { steps: 30, test_interval: 10, n_patches: 4, seed: 1, ..Default::default() };
    let out = nonblind_adapt(&lr, &pool, cfg, gr, &kernel, tcfg, Some(&hr)).unwrap();
    for c in &out.checkpoints {
        println!("step {:>3}: PSNR {:.3} dB", c.step, c.psnr.unwrap());
    }
    println!("metrics columns: {}", out.metrics_jsonl().lines().next().unwrap_or(""));
}
