//! Run manifests: the fully resolved configuration of a `train` or `trace`
//! invocation, written next to its outputs as JSON.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use lukmlp_core::training::{EtaCombine, UpdateMode};
use lukmlp_core::{Aggregator, TrainConfig, UnitValue};
use serde::{Deserialize, Serialize};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigRecord {
    pub eta: f64,
    pub eps: f64,
    pub epochs: u32,
    pub batch: usize,
    pub mode: String,
    pub eta_combine: String,
    pub norm_eps: f64,
    pub aggregator: String,
    pub seed: u64,
}

impl ConfigRecord {
    pub fn from_config(cfg: &TrainConfig) -> Self {
        ConfigRecord {
            eta: cfg.eta.get(),
            eps: cfg.eps.get(),
            epochs: cfg.max_epochs,
            batch: cfg.batch_size,
            mode: cfg.update_mode.name().into(),
            eta_combine: cfg.eta_combine.name().into(),
            norm_eps: cfg.norm_eps,
            aggregator: cfg.aggregator.name().into(),
            seed: cfg.seed,
        }
    }

    pub fn to_config(&self) -> Result<TrainConfig> {
        let unit = |name: &str, x: f64| UnitValue::new(x).map_err(|e| anyhow!("{name}: {e}"));
        let cfg = TrainConfig {
            eta: unit("eta", self.eta)?,
            eps: unit("eps", self.eps)?,
            max_epochs: self.epochs,
            batch_size: self.batch,
            update_mode: UpdateMode::from_name(&self.mode).ok_or_else(|| anyhow!("unknown mode {:?}", self.mode))?,
            eta_combine: EtaCombine::from_name(&self.eta_combine)
                .ok_or_else(|| anyhow!("unknown eta_combine {:?}", self.eta_combine))?,
            norm_eps: self.norm_eps,
            seed: self.seed,
            aggregator: Aggregator::from_name(&self.aggregator)
                .ok_or_else(|| anyhow!("unknown aggregator {:?}", self.aggregator))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataRecord {
    pub path: PathBuf,
    /// FNV-1a of the file bytes, hex.
    pub fnv: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitRecord {
    pub arch: Vec<usize>,
    /// `fan_in_uniform` (seeded) or `given` (canonical text below).
    pub scheme: String,
    /// Digest of the initial network.
    pub digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub input: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifacts {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub version: String,
    /// `train` or `trace`.
    pub command: String,
    pub config: ConfigRecord,
    pub init: InitRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleRecord>,
    pub artifacts: Artifacts,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m: RunManifest =
            serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
        if m.command != "train" && m.command != "trace" {
            bail!("manifest {}: unknown command {:?}", path.display(), m.command);
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// `trace.jsonl` → `trace.manifest.json`.
pub fn default_manifest_path(artifact: &Path) -> PathBuf {
    artifact.with_extension("manifest.json")
}
