//! The `onsr` command line: dataset synthesis, pretraining, adaptation,
//! evaluation and kernel export.
//!
//! Exit codes: 0 success, 2 usage or validation failure, 3 numerical abort.

mod commands;
pub mod manifest;
mod workers;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::trainer::{Mode, Variant};

pub use commands::{cmd_adapt, cmd_eval, cmd_kernel, cmd_pretrain, cmd_synth, EvalReport, ImageScore};
pub use manifest::{Manifest, ManifestEntry, MANIFEST_VERSION};
pub use workers::{parallel_map, worker_count};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "onsr", version, about = "Online blind super-resolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Blur, downscale and add noise to HR images with random kernels.
    Synth(SynthArgs),
    /// Train a reconstructor on bicubic degradations.
    Pretrain(PretrainArgs),
    /// Adapt a reconstructor to one LR image.
    Adapt(AdaptArgs),
    /// PSNR/SSIM of SR images against ground truth.
    Eval(EvalArgs),
    /// Export the effective kernel of a degradation model.
    Kernel(KernelArgs),
}

fn parse_scale(s: &str) -> Result<usize, String> {
    match s.trim() {
        "2" => Ok(2),
        "4" => Ok(4),
        _ => Err(format!("unsupported scale `{s}`, expected one of {{2, 4}}")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Lite,
    Full,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub hr_dir: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_parser = parse_scale)]
    pub scale: usize,
    /// Number of images to use (default: all, in name order).
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    /// Kernel support (default 15 for x2, 21 for x4).
    #[arg(long)]
    pub kernel_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PretrainArgs {
    #[arg(long)]
    pub hr_dir: PathBuf,
    #[arg(long, value_parser = parse_scale)]
    pub scale: usize,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Preset::Lite)]
    pub preset: Preset,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub patches: usize,
    /// LR patch extent.
    #[arg(long, default_value_t = 32)]
    pub patch_size: usize,
    #[arg(long = "learning-rate", default_value_t = 2e-4)]
    pub learning_rate: f64,
}

#[derive(Debug, Args)]
pub struct AdaptArgs {
    /// Low-resolution input image.
    #[arg(long)]
    pub lr: PathBuf,
    /// External HR images.
    #[arg(long)]
    pub hr_dir: PathBuf,
    #[arg(long, value_parser = parse_scale)]
    pub scale: usize,
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    #[arg(long, default_value_t = 10)]
    pub test_interval: usize,
    #[arg(long, default_value_t = 10)]
    pub patches: usize,
    #[arg(long, default_value_t = 32)]
    pub patch_size: usize,
    /// Reconstructor to start from (default: seeded random init).
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Architecture of the random init when `--init` is absent.
    #[arg(long, value_enum, default_value_t = Preset::Lite)]
    pub preset: Preset,
    #[arg(long, default_value_t = Mode::Separate)]
    pub mode: Mode,
    #[arg(long, default_value_t = Variant::Onsr)]
    pub variant: Variant,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub lr_gr: f64,
    #[arg(long, default_value_t = 2e-4)]
    pub lr_gd: f64,
    #[arg(long, default_value_t = 2e-4)]
    pub lr_dl: f64,
    /// Replace the learned degradation by `--kernel` + bicubic downscaling.
    #[arg(long, requires = "kernel")]
    pub non_blind: bool,
    #[arg(long, requires = "non_blind")]
    pub kernel: Option<PathBuf>,
    #[arg(long)]
    pub external_limit: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Ground-truth HR image; adds PSNR/SSIM to test steps.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Record wall-clock time in the metrics log.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("truth").required(true).args(["gt_dir", "gt_image"])))]
pub struct EvalArgs {
    #[arg(long)]
    pub sr_dir: PathBuf,
    /// Directory of ground-truth images with the same file names.
    #[arg(long)]
    pub gt_dir: Option<PathBuf>,
    /// One ground-truth image every SR image is compared with.
    #[arg(long)]
    pub gt_image: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub border_crop: usize,
    /// Score the luma channel instead of RGB.
    #[arg(long)]
    pub luma: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("output").required(true).multiple(true).args(["out", "pgm"])))]
pub struct KernelArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Kernel extent (default: the smallest untruncated support).
    #[arg(long)]
    pub support: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

/// Exit code for an engine error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonFinite { .. } => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

pub fn execute(command: &Command) -> crate::Result<()> {
    match command {
        Command::Synth(a) => cmd_synth(a).map(drop),
        Command::Pretrain(a) => cmd_pretrain(a).map(drop),
        Command::Adapt(a) => cmd_adapt(a).map(drop),
        Command::Eval(a) => cmd_eval(a).map(drop),
        Command::Kernel(a) => cmd_kernel(a).map(drop),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Messages go to stdout/stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
