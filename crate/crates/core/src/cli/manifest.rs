use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

/// One synthesized observation. Paths are relative to the manifest's
/// directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub lr_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hr_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_csv_path: Option<String>,
    pub scale: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub generator_seed: u64,
    pub count: usize,
    pub images: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(generator_seed: u64, images: Vec<ManifestEntry>) -> Self {
        Self {
            manifest_version: MANIFEST_VERSION,
            generator_seed,
            count: images.len(),
            images,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "manifest",
            detail: e.to_string(),
        })?;
        if m.manifest_version != MANIFEST_VERSION {
            return Err(Error::Parse {
                what: "manifest",
                detail: format!(
                    "manifest_version {} is not supported (expected {MANIFEST_VERSION})",
                    m.manifest_version
                ),
            });
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    /// Loads and validates against the files next to the manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m = Self::from_json(&text)?;
        m.validate(path.parent().unwrap_or(Path::new(".")))?;
        Ok(m)
    }

    /// Count matches, scale is uniform and every referenced file exists.
    pub fn validate(&self, root: &Path) -> Result<()> {
        let bad = |detail: String| Error::Parse {
            what: "manifest",
            detail,
        };
        if self.count != self.images.len() {
            return Err(bad(format!(
                "count {} does not match {} image records",
                self.count,
                self.images.len()
            )));
        }
        if let Some(first) = self.images.first() {
            if let Some(e) = self.images.iter().find(|e| e.scale != first.scale) {
                return Err(bad(format!(
                    "mixed scales: {} is x{} but {} is x{}",
                    first.name, first.scale, e.name, e.scale
                )));
            }
        }
        for e in &self.images {
            let paths = [Some(&e.lr_path), e.hr_path.as_ref(), e.kernel_csv_path.as_ref()];
            for p in paths.into_iter().flatten() {
                if !root.join(p).is_file() {
                    return Err(bad(format!("{}: missing file {p}", e.name)));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(root: &Path, rel: &str) -> PathBuf {
        root.join(rel)
    }
}
