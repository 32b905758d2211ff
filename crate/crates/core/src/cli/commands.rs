use std::fs;
use std::path::{Path, PathBuf};

use rand::RngCore;
use serde::Serialize;

use super::manifest::{Manifest, ManifestEntry};
use super::workers::{parallel_map, worker_count};
use super::{AdaptArgs, EvalArgs, KernelArgs, Preset, PretrainArgs, SynthArgs};
use crate::degradation::{degrade, effective_kernel, min_support, synth_kernel, DegradationSpec, GdNet, Kernel2D, SynthOptions};
use crate::error::{Error, Result};
use crate::imaging::{load_png, psnr_with, save_png, ssim_with, ImageBuf, MetricOptions, Rng, Stream};
use crate::models::{gr_init, GrConfig, ModelParams, Role};
use crate::trainer::{online_adapt, pretrain_gr, AdaptOutcome, PretrainConfig, TrainConfig};

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// PNG files directly inside `dir`, sorted by name.
fn list_pngs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(config_err(format!("no PNG images in {}", dir.display())));
    }
    Ok(out)
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<ImageBuf>> {
    parallel_map(paths, worker_count(), |_, p| load_png(p))
        .into_iter()
        .collect()
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn gr_config(preset: Preset, scale: usize) -> GrConfig {
    match preset {
        Preset::Lite => GrConfig::lite(scale),
        Preset::Full => GrConfig::full(scale),
    }
}

/// Synthesizes one LR observation per HR image and writes the manifest.
pub fn cmd_synth(args: &SynthArgs) -> Result<Manifest> {
    let mut paths = list_pngs(&args.hr_dir)?;
    if let Some(count) = args.count {
        if count == 0 || count > paths.len() {
            return Err(config_err(format!(
                "--count {count} but {} holds {} PNG images",
                args.hr_dir.display(),
                paths.len()
            )));
        }
        paths.truncate(count);
    }
    let mut opts = SynthOptions::for_scale(args.scale);
    if let Some(size) = args.kernel_size {
        opts.size = size;
    }
    for sub in ["lr", "hr", "kernels"] {
        create_dir(&args.out_dir.join(sub))?;
    }
    let root = Rng::new(args.seed);
    let results = parallel_map(&paths, worker_count(), |_, path| -> Result<ManifestEntry> {
        let name = stem(path);
        let hr = load_png(path)?;
        let cropped = hr.crop_to_multiple(args.scale)?;
        if !cropped.same_shape(&hr) {
            log::info!(
                "{name}: cropped {}x{} to {}x{} for x{}",
                hr.height(),
                hr.width(),
                cropped.height(),
                cropped.width(),
                args.scale
            );
        }
        let seed = root.keyed(Stream::Custom, &name).next_u64();
        let image_rng = Rng::new(seed);
        let (kernel, shape) = synth_kernel(&mut image_rng.substream(Stream::Kernel), opts)?;
        let spec = DegradationSpec::new(kernel.clone(), args.scale, args.noise_sigma)?;
        let lr = degrade(&cropped, &spec, &mut image_rng.substream(Stream::Noise))?;
        let entry = ManifestEntry {
            lr_path: format!("lr/{name}.png"),
            hr_path: Some(format!("hr/{name}.png")),
            kernel_csv_path: Some(format!("kernels/{name}.csv")),
            scale: args.scale,
            noise_sigma: args.noise_sigma,
            seed,
            lambda1: shape.lambda1,
            lambda2: shape.lambda2,
            theta: shape.theta,
            name,
        };
        save_png(&lr, &args.out_dir.join(&entry.lr_path))?;
        save_png(&cropped, &args.out_dir.join(entry.hr_path.as_ref().expect("set")))?;
        kernel.save_csv(&args.out_dir.join(entry.kernel_csv_path.as_ref().expect("set")))?;
        Ok(entry)
    });
    let entries = results.into_iter().collect::<Result<Vec<_>>>()?;
    let manifest = Manifest::new(args.seed, entries);
    manifest.save(&args.out_dir.join("manifest.json"))?;
    println!(
        "synthesized {} x{} observations into {}",
        manifest.count,
        args.scale,
        args.out_dir.display()
    );
    Ok(manifest)
}

/// Pretrains a reconstructor on bicubic degradations and saves it.
pub fn cmd_pretrain(args: &PretrainArgs) -> Result<Vec<f64>> {
    let pool = load_all(&list_pngs(&args.hr_dir)?)?;
    let cfg = gr_config(args.preset, args.scale);
    let init = gr_init(&cfg, &Rng::new(args.seed))?;
    let pcfg = PretrainConfig {
        steps: args.steps,
        n_patches: args.patches,
        lr_patch: args.patch_size,
        lr: args.learning_rate,
        seed: args.seed,
    };
    let out = pretrain_gr(&pool, &cfg, init, &pcfg)?;
    out.params.save(&args.out)?;
    let tail = &out.losses[out.losses.len().saturating_sub(50)..];
    if tail.is_empty() {
        println!("no steps run; saved the initialization to {}", args.out.display());
    } else {
        let smoothed = tail.iter().sum::<f64>() / tail.len() as f64;
        println!(
            "final smoothed L1 {smoothed:.6} after {} steps; saved {}",
            args.steps,
            args.out.display()
        );
    }
    Ok(out.losses)
}

/// Runs one adaptation session and writes its outputs into `--out-dir`.
pub fn cmd_adapt(args: &AdaptArgs) -> Result<AdaptOutcome> {
    let lr = load_png(&args.lr)?;
    let pool = load_all(&list_pngs(&args.hr_dir)?)?;
    let (gr_cfg, gr) = match &args.init {
        Some(path) => {
            let params = ModelParams::load(path)?;
            let cfg = GrConfig::infer(&params)?;
            if cfg.scale != args.scale {
                return Err(config_err(format!(
                    "{} is a x{} model but --scale is {}",
                    path.display(),
                    cfg.scale,
                    args.scale
                )));
            }
            (cfg, params)
        }
        None => {
            let cfg = gr_config(args.preset, args.scale);
            let params = gr_init(&cfg, &Rng::new(args.seed))?;
            (cfg, params)
        }
    };
    let gt_kernel = args.kernel.as_deref().map(Kernel2D::load_csv).transpose()?;
    let ground_truth = args.gt.as_deref().map(load_png).transpose()?;
    let cfg = TrainConfig {
        steps: args.steps,
        test_interval: args.test_interval,
        n_patches: args.patches,
        lr_patch: args.patch_size,
        lambda_gan: args.lambda,
        lr_gr: args.lr_gr,
        lr_gd: args.lr_gd,
        lr_dl: args.lr_dl,
        mode: args.mode,
        variant: args.variant,
        blind: !args.non_blind,
        gt_kernel,
        external_limit: args.external_limit,
        seed: args.seed,
        record_timing: args.timing,
    };
    create_dir(&args.out_dir)?;
    let outcome = online_adapt(&lr, &pool, gr_cfg, gr, cfg, ground_truth.as_ref())?;
    let out = &args.out_dir;
    for c in &outcome.checkpoints {
        save_png(&c.image, &out.join(format!("sr_step{}.png", c.step)))?;
    }
    save_png(&outcome.sr_final, &out.join("sr_final.png"))?;
    outcome.kernel_estimate.save_csv(&out.join("kernel_estimate.csv"))?;
    let metrics = out.join("metrics.jsonl");
    fs::write(&metrics, outcome.metrics_jsonl()).map_err(|e| Error::io(&metrics, e))?;
    outcome.gr.save(&out.join("gr.bin"))?;
    if let Some(net) = outcome.degrader.learned() {
        net.to_params().save(&out.join("gd.bin"))?;
    }
    match outcome.psnr_final {
        Some(p) => println!("{} steps done; final PSNR {p:.3} dB; outputs in {}", args.steps, out.display()),
        None => println!("{} steps done; outputs in {}", args.steps, out.display()),
    }
    Ok(outcome)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageScore {
    pub name: String,
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub metric_mode: String,
    pub border_crop: usize,
    pub count: usize,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
    /// Highest-PSNR image.
    pub best: ImageScore,
    pub images: Vec<ImageScore>,
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Scores SR images against ground truth matched by file name (or against
/// a single ground-truth image).
pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport> {
    let opts = MetricOptions::new(args.border_crop, args.luma);
    let sr_paths = list_pngs(&args.sr_dir)?;
    let pairs: Vec<(PathBuf, PathBuf)> = match (&args.gt_dir, &args.gt_image) {
        (Some(gt_dir), _) => {
            let gt_paths = list_pngs(gt_dir)?;
            let sr_names: Vec<String> = sr_paths.iter().map(|p| file_name(p)).collect();
            let gt_names: Vec<String> = gt_paths.iter().map(|p| file_name(p)).collect();
            let mut unmatched: Vec<String> = sr_names
                .iter()
                .filter(|n| !gt_names.contains(n))
                .map(|n| format!("{n} (no ground truth)"))
                .collect();
            unmatched.extend(
                gt_names
                    .iter()
                    .filter(|n| !sr_names.contains(n))
                    .map(|n| format!("{n} (no SR image)")),
            );
            if !unmatched.is_empty() {
                return Err(config_err(format!("unmatched files: {}", unmatched.join(", "))));
            }
            sr_paths.iter().map(|p| (p.clone(), gt_dir.join(file_name(p)))).collect()
        }
        (None, Some(gt)) => sr_paths.iter().map(|p| (p.clone(), gt.clone())).collect(),
        (None, None) => return Err(config_err("either --gt-dir or --gt-image is required")),
    };
    let scores = parallel_map(&pairs, worker_count(), |_, (sr, gt)| -> Result<ImageScore> {
        let (a, b) = (load_png(sr)?, load_png(gt)?);
        Ok(ImageScore {
            name: file_name(sr),
            psnr: psnr_with(&a, &b, opts)?,
            ssim: ssim_with(&a, &b, opts)?,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let n = scores.len() as f64;
    let best = scores
        .iter()
        .max_by(|a, b| a.psnr.total_cmp(&b.psnr))
        .expect("at least one image")
        .clone();
    let report = EvalReport {
        metric_mode: opts.mode_label().into(),
        border_crop: args.border_crop,
        count: scores.len(),
        mean_psnr: scores.iter().map(|s| s.psnr).sum::<f64>() / n,
        mean_ssim: scores.iter().map(|s| s.ssim).sum::<f64>() / n,
        best,
        images: scores,
    };
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&report).expect("plain data") + "\n";
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    println!(
        "{} images ({}, border {}): mean PSNR {:.4} dB, mean SSIM {:.5}; best {} at {:.4} dB",
        report.count,
        report.metric_mode,
        report.border_crop,
        report.mean_psnr,
        report.mean_ssim,
        report.best.name,
        report.best.psnr
    );
    Ok(report)
}

/// Writes the effective kernel of a stored degradation model.
pub fn cmd_kernel(args: &KernelArgs) -> Result<Kernel2D> {
    let params = ModelParams::load(&args.model)?;
    if params.role() != Role::Gd {
        return Err(config_err(format!(
            "{} holds {} parameters, expected a degradation model",
            args.model.display(),
            params.role().label()
        )));
    }
    let net = GdNet::from_params(&params)?;
    let support = match args.support {
        Some(s) => s,
        None => min_support(net.scale())?,
    };
    let kernel = effective_kernel(&net, support)?;
    if let Some(path) = &args.out {
        kernel.save_csv(path)?;
    }
    if let Some(path) = &args.pgm {
        kernel.save_pgm(path)?;
    }
    let (cy, cx) = kernel.centroid();
    println!(
        "{}x{} kernel, sum {:.6}, centroid ({cy:.3}, {cx:.3})",
        kernel.size(),
        kernel.size(),
        kernel.sum()
    );
    Ok(kernel)
}
