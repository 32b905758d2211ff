mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use onsr::cli::{run, Manifest, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};
use onsr::degradation::Kernel2D;
use onsr::imaging::{load_png, save_png, synthetic};
use onsr::models::{gr_init, ModelParams, Role};

fn onsr(args: &[&str]) -> i32 {
    run(std::iter::once("onsr").chain(args.iter().copied()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes `count` synthetic HR scenes of `extent`² into `dir`.
fn hr_dir(dir: &Path, seed: u64, count: usize, extent: usize) {
    fs::create_dir_all(dir).unwrap();
    for (i, img) in synthetic::scene_set(seed, count, extent, extent).unwrap().iter().enumerate() {
        save_png(img, &dir.join(format!("img{i:02}.png"))).unwrap();
    }
}

#[test]
fn synth_writes_one_observation_per_image_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let hr = tmp.path().join("hr");
    hr_dir(&hr, 1, 3, 50);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let code = onsr(&["synth", "--hr-dir", p(&hr), "--out-dir", p(out), "--scale", "4", "--seed", "7", "--noise-sigma", "0.01"]);
        assert_eq!(code, EXIT_OK);
    }
    let m = Manifest::load(&a.join("manifest.json")).unwrap();
    assert_eq!(m.count, 3);
    for e in &m.images {
        let lr = load_png(&a.join(&e.lr_path)).unwrap();
        assert_eq!((lr.height(), lr.width()), (12, 12));
        let hr = load_png(&a.join(e.hr_path.as_ref().unwrap())).unwrap();
        assert_eq!((hr.height(), hr.width()), (48, 48));
        let k = Kernel2D::load_csv(&a.join(e.kernel_csv_path.as_ref().unwrap())).unwrap();
        assert!((k.sum() - 1.0).abs() < 1e-9);
        for sub in [&e.lr_path, e.kernel_csv_path.as_ref().unwrap()] {
            assert_eq!(fs::read(a.join(sub)).unwrap(), fs::read(b.join(sub)).unwrap());
        }
    }
    assert_eq!(fs::read(a.join("manifest.json")).unwrap(), fs::read(b.join("manifest.json")).unwrap());

    let c = tmp.path().join("c");
    assert_eq!(onsr(&["synth", "--hr-dir", p(&hr), "--out-dir", p(&c), "--scale", "2", "--count", "2"]), EXIT_OK);
    assert_eq!(Manifest::load(&c.join("manifest.json")).unwrap().count, 2);
}

#[test]
fn unsupported_scale_and_bad_flags_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let hr = tmp.path().join("hr");
    hr_dir(&hr, 2, 1, 24);
    let out = tmp.path().join("out");
    assert_eq!(onsr(&["synth", "--hr-dir", p(&hr), "--out-dir", p(&out), "--scale", "3"]), EXIT_USAGE);
    assert!(!out.exists());
    assert_eq!(onsr(&["synth", "--hr-dir", p(&hr), "--out-dir", p(&out), "--scale", "2", "--count", "5"]), EXIT_USAGE);
    assert_eq!(onsr(&["kernel", "--model", "missing.bin"]), EXIT_USAGE);
    assert_eq!(onsr(&["adapt", "--lr", "x.png", "--hr-dir", ".", "--scale", "2", "--out-dir", ".", "--non-blind"]), EXIT_USAGE);
    assert_eq!(onsr(&["--help"]), EXIT_OK);
}

#[test]
fn pretrain_with_no_steps_saves_the_seeded_init() {
    let tmp = tempfile::tempdir().unwrap();
    let hr = tmp.path().join("hr");
    hr_dir(&hr, 3, 2, 64);
    let model = tmp.path().join("gr.bin");
    assert_eq!(onsr(&["pretrain", "--hr-dir", p(&hr), "--scale", "2", "--steps", "0", "--seed", "4", "--out", p(&model)]), EXIT_OK);
    let saved = ModelParams::load(&model).unwrap();
    assert_eq!(saved.role(), Role::Gr);
    let want = gr_init(&onsr::models::GrConfig::lite(2), &onsr::imaging::Rng::new(4)).unwrap();
    assert_eq!(saved.value_bytes(), want.value_bytes());

    let short = tmp.path().join("short.bin");
    let code = onsr(&["pretrain", "--hr-dir", p(&hr), "--scale", "2", "--steps", "2", "--patches", "2", "--patch-size", "16", "--out", p(&short)]);
    assert_eq!(code, EXIT_OK);
    assert_ne!(ModelParams::load(&short).unwrap().value_bytes(), want.value_bytes());
}

/// Synthesized ×2 suite plus an external pool, returning `(root, manifest)`.
fn suite(tmp: &Path) -> Manifest {
    hr_dir(&tmp.join("hr"), 5, 1, 64);
    hr_dir(&tmp.join("pool"), 6, 2, 48);
    let data = tmp.join("data");
    assert_eq!(onsr(&["synth", "--hr-dir", p(&tmp.join("hr")), "--out-dir", p(&data), "--scale", "2", "--seed", "1"]), EXIT_OK);
    Manifest::load(&data.join("manifest.json")).unwrap()
}

fn adapt_args<'a>(lr: &'a str, pool: &'a str, out: &'a str, steps: &'a str) -> Vec<&'a str> {
    vec![
        "adapt", "--lr", lr, "--hr-dir", pool, "--scale", "2", "--steps", steps, "--test-interval", "1",
        "--patches", "2", "--patch-size", "16", "--out-dir", out, "--seed", "3",
    ]
}

#[test]
fn adapt_writes_every_artifact_and_repeats_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let m = suite(tmp.path());
    let data = tmp.path().join("data");
    let e = &m.images[0];
    let lr = data.join(&e.lr_path);
    let gt = data.join(e.hr_path.as_ref().unwrap());
    let pool = tmp.path().join("pool");
    let runs: Vec<_> = ["r1", "r2"].iter().map(|n| tmp.path().join(n)).collect();
    for out in &runs {
        let mut args = adapt_args(p(&lr), p(&pool), p(out), "2");
        args.extend(["--gt", p(&gt)]);
        assert_eq!(onsr(&args), EXIT_OK);
    }
    for name in ["sr_step1.png", "sr_step2.png", "sr_final.png", "kernel_estimate.csv", "metrics.jsonl", "gr.bin", "gd.bin"] {
        let (a, b) = (fs::read(runs[0].join(name)).unwrap(), fs::read(runs[1].join(name)).unwrap());
        assert_eq!(a, b, "{name}");
    }
    let log = fs::read_to_string(runs[0].join("metrics.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    for (i, rec) in lines.iter().enumerate() {
        assert_eq!(rec["step"], i + 1);
        for key in ["l_ib", "l_eb", "l_gan_d", "l_gan_g", "psnr", "ssim"] {
            assert!(rec[key].is_number(), "{key}");
        }
        assert!(rec.get("ms_elapsed").is_none());
    }
    let sr = load_png(&runs[0].join("sr_final.png")).unwrap();
    assert_eq!((sr.height(), sr.width()), (64, 64));

    // The exported kernel matches the session's own estimate.
    let csv = tmp.path().join("k.csv");
    assert_eq!(onsr(&["kernel", "--model", p(&runs[0].join("gd.bin")), "--out", p(&csv)]), EXIT_OK);
    let exported = Kernel2D::load_csv(&csv).unwrap();
    let estimate = Kernel2D::load_csv(&runs[0].join("kernel_estimate.csv")).unwrap();
    assert_eq!(exported.size(), estimate.size());
    assert!(exported.taps().iter().zip(estimate.taps()).all(|(a, b)| (a - b).abs() < 1e-9));
    assert_eq!(onsr(&["kernel", "--model", p(&runs[0].join("gd.bin")), "--support", "3", "--out", p(&csv)]), EXIT_USAGE);
    assert_eq!(onsr(&["kernel", "--model", p(&runs[0].join("gr.bin")), "--out", p(&csv)]), EXIT_USAGE);
}

#[test]
fn nonblind_adapt_echoes_the_kernel() {
    let tmp = tempfile::tempdir().unwrap();
    let m = suite(tmp.path());
    let data = tmp.path().join("data");
    let e = &m.images[0];
    let (lr, kernel) = (data.join(&e.lr_path), data.join(e.kernel_csv_path.as_ref().unwrap()));
    let out = tmp.path().join("nb");
    let pool = tmp.path().join("pool");
    let mut args = adapt_args(p(&lr), p(&pool), p(&out), "1");
    args.extend(["--non-blind", "--kernel", p(&kernel), "--variant", "EBSR"]);
    assert_eq!(onsr(&args), EXIT_OK);
    let echoed = Kernel2D::load_csv(&out.join("kernel_estimate.csv")).unwrap();
    let gt = Kernel2D::load_csv(&kernel).unwrap();
    assert!(echoed.taps().iter().zip(gt.taps()).all(|(a, b)| (a - b).abs() < 1e-12));
    assert!(!out.join("gd.bin").exists());
    let log = fs::read_to_string(out.join("metrics.jsonl")).unwrap();
    assert!(!log.contains("l_gan") && !log.contains("l_ib"));
}

#[test]
fn adapt_with_no_steps_is_the_init_forward_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let m = suite(tmp.path());
    let lr = tmp.path().join("data").join(&m.images[0].lr_path);
    let out = tmp.path().join("z");
    assert_eq!(onsr(&adapt_args(p(&lr), p(&tmp.path().join("pool")), p(&out), "0")), EXIT_OK);
    assert_eq!(fs::read_to_string(out.join("metrics.jsonl")).unwrap(), "");
    // The lite init zeroes the final conv: the untrained output is black.
    let sr = load_png(&out.join("sr_final.png")).unwrap();
    assert!(sr.pixels().iter().all(|&v| v == 0.0));
}

#[test]
fn eval_scores_an_image_set_against_itself() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("imgs");
    hr_dir(&dir, 8, 2, 32);
    let report = tmp.path().join("report.json");
    let code = onsr(&["eval", "--sr-dir", p(&dir), "--gt-dir", p(&dir), "--border-crop", "2", "--report", p(&report)]);
    assert_eq!(code, EXIT_OK);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["count"], 2);
    assert_eq!(r["mean_psnr"], 100.0);
    assert_eq!(r["mean_ssim"], 1.0);

    let other = tmp.path().join("other");
    hr_dir(&other, 9, 3, 32);
    assert_eq!(onsr(&["eval", "--sr-dir", p(&dir), "--gt-dir", p(&other)]), EXIT_USAGE);
    assert_eq!(onsr(&["eval", "--sr-dir", p(&dir)]), EXIT_USAGE);
}

#[test]
fn binary_reports_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_onsr");
    let status = Command::new(exe).args(["synth", "--hr-dir", ".", "--out-dir", ".", "--scale", "3"]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&status.stderr).contains("{2, 4}"));
    assert_eq!(Command::new(exe).arg("--version").output().unwrap().status.code(), Some(EXIT_OK));
}

#[test]
fn non_finite_parameters_exit_with_the_numeric_code() {
    let tmp = tempfile::tempdir().unwrap();
    let m = suite(tmp.path());
    let lr = tmp.path().join("data").join(&m.images[0].lr_path);
    let mut params = gr_init(&onsr::models::GrConfig::lite(2), &onsr::imaging::Rng::new(0)).unwrap();
    params.get_mut("conv_first.weight").unwrap().data_mut()[0] = f32::NAN;
    let init = tmp.path().join("nan.bin");
    params.save(&init).unwrap();
    let out = tmp.path().join("nan");
    let pool = tmp.path().join("pool");
    let mut args = adapt_args(p(&lr), p(&pool), p(&out), "1");
    args.extend(["--init", p(&init)]);
    assert_eq!(onsr(&args), EXIT_NUMERIC);
}
