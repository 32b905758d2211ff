//! Pretrains a small reconstructor on bicubic downscaling of synthetic
//! scenes and saves it.
//!
//! Usage: `pretrain_reconstructor [steps] [out.bin]`.

use onsr::imaging::{synthetic, Rng};
use onsr::models::{gr_init, GrConfig};
use onsr::trainer::{pretrain_gr, PretrainConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let steps = args.first().map_or(40, |s| s.parse().unwrap());
    let out = args.get(1).map_or_else(|| std::env::temp_dir().join("onsr_gr.bin"), Into::into);
    let pool = synthetic::scene_set(99, 8, 128, 128).unwrap();
    let cfg = GrConfig::lite(2);
    let init = gr_init(&cfg, &Rng::new(1)).unwrap();
    let pcfg = PretrainConfig { steps, n_patches: 4, lr_patch: 24, lr: 4e-4, seed: 0 };
    let res = pretrain_gr(&pool, &cfg, init, &pcfg).unwrap();
    for (i, chunk) in res.losses.chunks(10).enumerate() {
        println!("steps {:>4}..{:<4} mean L1 {:.4}", i * 10 + 1, i * 10 + chunk.len(), chunk.iter().sum::<f64>() / chunk.len() as f64);
    }
    res.params.save(&out).unwrap();
    println!("saved {}", out.display());
}
