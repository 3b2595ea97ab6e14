//! Run configuration files: one JSON document wiring datasets, the risk
//! grid, optional data rules, and output flags into a reproducible run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::risk::KeyTargetConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticEntry {
    pub label: String,
    pub path: PathBuf,
}

fn default_bin_width() -> i64 {
    5
}

fn default_include_original() -> bool {
    true
}

/// Top-level run configuration (the `--config` file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub original: PathBuf,
    pub schema: PathBuf,
    #[serde(default)]
    pub synthetic: Vec<SyntheticEntry>,
    pub risk: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub cio_floor_at_zero: bool,
    #[serde(default = "default_include_original")]
    pub include_original_point: bool,
    #[serde(default = "default_bin_width")]
    pub bin_width: i64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bin_width <= 0 {
            return Err(Error::InvalidConfig("bin_width must be positive".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for entry in &self.synthetic {
            if !seen.insert(entry.label.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "synthetic: duplicate label {:?}",
                    entry.label
                )));
            }
        }
        Ok(())
    }

    /// Resolves a path in the config relative to the config file's directory.
    pub fn resolve(&self, config_path: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            config_path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }
}

/// On-disk risk grid: every target crossed with every key set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskConfig {
    pub targets: Vec<String>,
    pub key_sets: Vec<Vec<String>>,
}

impl RiskConfig {
    pub fn from_json(text: &str) -> Result<RiskConfig> {
        let cfg: RiskConfig = serde_json::from_str(text)?;
        if cfg.targets.is_empty() || cfg.key_sets.is_empty() {
            return Err(Error::InvalidConfig(
                "risk config needs at least one target and one key set".into(),
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RiskConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        RiskConfig::from_json(&text)
    }

    /// Expands to the cross product of targets and key sets, targets in the
    /// order given, key sets nested within each target.
    pub fn expand(&self) -> Vec<KeyTargetConfig> {
        self.targets
            .iter()
            .flat_map(|target| {
                self.key_sets.iter().map(move |keys| {
                    let refs: Vec<&str> = keys.iter().map(String::as_str).collect();
                    KeyTargetConfig::new(&refs, target)
                })
            })
            .collect()
    }
}
