use std::fmt;
use std::str::FromStr;

use crate::degradation::Kernel2D;
use crate::error::{ensure, Error, Result};

/// How the three parameter sets are optimized within one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Disjoint losses per network, updated one after another.
    #[default]
    Separate,
    /// One combined loss, all networks stepped together.
    Joint,
}

/// Which branches and adversarial terms take part in adaptation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Internal branch only; both generators learn from the internal loss.
    Ibsr,
    /// External branch only, with the degradation frozen at its init.
    Ebsr,
    /// Both branches, no discriminator.
    IbEbsr,
    /// Both branches plus the low-resolution discriminator.
    #[default]
    Onsr,
    /// As `Onsr`, plus a discriminator on super-resolved patches.
    IbEbGsr,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Ibsr,
        Variant::Ebsr,
        Variant::IbEbsr,
        Variant::Onsr,
        Variant::IbEbGsr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Ibsr => "IBSR",
            Variant::Ebsr => "EBSR",
            Variant::IbEbsr => "IB-EBSR",
            Variant::Onsr => "ONSR",
            Variant::IbEbGsr => "IB-EB-GSR",
        }
    }

    pub fn internal_branch(self) -> bool {
        self != Variant::Ebsr
    }

    pub fn external_branch(self) -> bool {
        self != Variant::Ibsr
    }

    /// Whether the degradation network is updated at all.
    pub fn trains_gd(self) -> bool {
        self != Variant::Ebsr
    }

    pub fn lr_discriminator(self) -> bool {
        matches!(self, Variant::Onsr | Variant::IbEbGsr)
    }

    pub fn hr_discriminator(self) -> bool {
        self == Variant::IbEbGsr
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('_', "-");
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == norm)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown variant `{s}`, expected one of IBSR, EBSR, IB-EBSR, ONSR, IB-EB-GSR"
                ))
            })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Separate => "separate",
            Mode::Joint => "joint",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "separate" => Ok(Mode::Separate),
            "joint" => Ok(Mode::Joint),
            _ => Err(Error::Config(format!(
                "unknown mode `{s}`, expected separate or joint"
            ))),
        }
    }
}

/// Settings of one adaptation session.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub steps: usize,
    pub test_interval: usize,
    pub n_patches: usize,
    pub lr_patch: usize,
    pub lambda_gan: f64,
    pub lr_gr: f64,
    pub lr_gd: f64,
    pub lr_dl: f64,
    pub mode: Mode,
    pub variant: Variant,
    pub blind: bool,
    pub gt_kernel: Option<Kernel2D>,
    pub external_limit: Option<usize>,
    pub seed: u64,
    /// Adds wall-clock milliseconds to every metrics record (makes logs
    /// differ between runs).
    pub record_timing: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 500,
            test_interval: 10,
            n_patches: 10,
            lr_patch: 32,
            lambda_gan: 1.0,
            lr_gr: 1e-4,
            lr_gd: 2e-4,
            lr_dl: 2e-4,
            mode: Mode::Separate,
            variant: Variant::Onsr,
            blind: true,
            gt_kernel: None,
            external_limit: None,
            seed: 0,
            record_timing: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        if self.test_interval < 1 {
            return cfg_err("test interval must be >= 1".into());
        }
        if self.n_patches < 1 {
            return cfg_err("at least one patch per step is required".into());
        }
        if self.lr_patch < 8 {
            return cfg_err(format!("patch size {} is below the minimum of 8", self.lr_patch));
        }
        if !(self.lambda_gan >= 0.0 && self.lambda_gan.is_finite()) {
            return cfg_err(format!("lambda must be finite and >= 0, got {}", self.lambda_gan));
        }
        for (name, lr) in [("lr_gr", self.lr_gr), ("lr_gd", self.lr_gd), ("lr_dl", self.lr_dl)] {
            if !(lr >= 0.0 && lr.is_finite()) {
                return cfg_err(format!("{name} must be finite and >= 0, got {lr}"));
            }
        }
        if !self.blind && self.gt_kernel.is_none() {
            return cfg_err("non-blind adaptation needs a ground-truth kernel".into());
        }
        if let Some(limit) = self.external_limit {
            ensure!(limit >= 1, "external limit must be >= 1");
        }
        Ok(())
    }

    /// Number of test checkpoints before the final output.
    pub fn checkpoint_count(&self) -> usize {
        self.steps / self.test_interval
    }
}
