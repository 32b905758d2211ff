//! Runs the same observation with alternating (separate) and single-loss
//! (joint) optimization and prints both PSNR curves.

use onsr::degradation::{degrade, synth_kernel, DegradationSpec, SynthOptions};
use onsr::imaging::{synthetic, Rng, Stream};
use onsr::models::{gr_init, GrConfig};
use onsr::trainer::{online_adapt, pretrain_gr, Mode, PretrainConfig, TrainConfig};

fn main() {
    let steps = std::env::args().nth(1).map_or(30, |s| s.parse().unwrap());
    let pool = synthetic::scene_set(99, 8, 128, 128).unwrap();
    let cfg = GrConfig::lite(2);
    let init = gr_init(&cfg, &Rng::new(1)).unwrap();
    let pcfg = PretrainConfig { steps: 60, n_patches: 4, lr_patch: 24, lr: 4e-4, seed: 0 };
    let gr = pretrain_gr(&pool, &cfg, init, &pcfg).unwrap().params;

    let hr = synthetic::scene_set(502, 1, 96, 96).unwrap().remove(0);
    let rng = Rng::new(10);
    let (kernel, _) = synth_kernel(&mut rng.substream(Stream::Kernel), SynthOptions::for_scale(2)).unwrap();
    let lr = degrade(&hr, &DegradationSpec::new(kernel, 2, 0.0).unwrap(), &mut rng.substream(Stream::Noise)).unwrap();

    for mode in [Mode::Separate, Mode::Joint] {
        let tcfg = TrainConfig { steps, test_interval: 10, n_patches: 4, mode, seed: 4, ..Default::default() };
        let out = online_adapt(&lr, &pool, cfg, gr.clone(), tcfg, Some(&hr)).unwrap();
        let curve: Vec<String> = out.checkpoints.iter().map(|c| format!("{:.2}", c.psnr.unwrap())).collect();
        println!("{mode:>8}: {}", curve.join(" "));
    }
}
