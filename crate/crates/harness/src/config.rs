//! Experiment configuration: a single JSON document with a versioned schema.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};
use tessgof_core::models::{study_model, ModelSpec};
use tessgof_core::stats::StatisticSpec;

use crate::error::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

/// A study model by name and target cell count, or a full model spec.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ModelEntry {
    Preset(Preset),
    Spec(ModelSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub preset: String,
    pub n_cells: usize,
    /// Overrides the preset's name in outputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl<'de> Deserialize<'de> for ModelEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        // dispatch on the key so errors come from the intended variant
        let v = serde_json::Value::deserialize(d)?;
        if v.get("preset").is_some() {
            Preset::deserialize(v)
                .map(ModelEntry::Preset)
                .map_err(D::Error::custom)
        } else {
            ModelSpec::deserialize(v)
                .map(ModelEntry::Spec)
                .map_err(D::Error::custom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exports {
    /// Persistence diagram of the first replication of every model.
    #[serde(default = "yes")]
    pub diagrams: bool,
    /// Kernel density of every standardized calibration sample.
    #[serde(default = "yes")]
    pub densities: bool,
    /// Tessellation file of the first replication of every model.
    #[serde(default)]
    pub tessellations: bool,
    #[serde(default = "default_grid")]
    pub density_grid: usize,
}

fn yes() -> bool {
    true
}

fn default_grid() -> usize {
    512
}

impl Default for Exports {
    fn default() -> Self {
        Exports {
            diagrams: true,
            densities: true,
            tessellations: false,
            density_grid: default_grid(),
        }
    }
}

fn default_alpha() -> f64 {
    0.05
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub models: Vec<ModelEntry>,
    /// Models calibrated as nulls; every model when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nulls: Option<Vec<String>>,
    /// Models tested against each null; every model when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternatives: Option<Vec<String>>,
    pub statistics: Vec<StatisticSpec>,
    pub n_calibration: usize,
    pub n_test: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; the environment variable takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub exports: Exports,
}

/// A validated configuration with presets expanded. Everything that can
/// change a result is here and in the hash; the output directory and the
/// worker count are not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment {
    pub schema_version: u32,
    pub name: String,
    pub models: Vec<ModelSpec>,
    pub nulls: Vec<String>,
    pub alternatives: Vec<String>,
    pub statistics: Vec<StatisticSpec>,
    pub n_calibration: usize,
    pub n_test: usize,
    pub alpha: f64,
    pub master_seed: u64,
    pub exports: Exports,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks every parameter range and expands presets.
    pub fn resolve(&self) -> Result<Experiment, HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            ));
        }
        if self.models.is_empty() {
            return bad("models: at least one model is required".into());
        }
        let mut models = Vec::with_capacity(self.models.len());
        for (i, entry) in self.models.iter().enumerate() {
            let spec = match entry {
                ModelEntry::Preset(p) => {
                    let mut m = study_model(&p.preset, p.n_cells).ok_or_else(|| {
                        HarnessError::Config(format!(
                            "models[{i}].preset: unknown study model `{}`",
                            p.preset
                        ))
                    })?;
                    if let Some(name) = &p.name {
                        m.name = name.clone();
                    }
                    m
                }
                ModelEntry::Spec(m) => m.clone(),
            };
            spec.validate()
                .map_err(|e| HarnessError::Config(format!("models[{i}]: {e}")))?;
            models.push(spec);
        }
        let mut names = HashSet::new();
        for m in &models {
            if !names.insert(m.name.as_str()) {
                return bad(format!("models: duplicate model name `{}`", m.name));
            }
        }
        let pick = |field: &str, list: &Option<Vec<String>>| -> Result<Vec<String>, HarnessError> {
            match list {
                None => Ok(models.iter().map(|m| m.name.clone()).collect()),
                Some(l) if l.is_empty() => {
                    Err(HarnessError::Config(format!("{field}: must not be empty")))
                }
                Some(l) => {
                    for n in l {
                        if !names.contains(n.as_str()) {
                            return Err(HarnessError::Config(format!(
                                "{field}: unknown model `{n}`"
                            )));
                        }
                    }
                    Ok(l.clone())
                }
            }
        };
        let nulls = pick("nulls", &self.nulls)?;
        let alternatives = pick("alternatives", &self.alternatives)?;
        if self.statistics.is_empty() {
            return bad("statistics: at least one statistic is required".into());
        }
        for (k, s) in self.statistics.iter().enumerate() {
            s.validate()
                .map_err(|e| HarnessError::Config(format!("statistics[{k}]: {e}")))?;
        }
        if self.n_calibration < 2 {
            return bad(format!(
                "n_calibration: need at least 2 replications, got {}",
                self.n_calibration
            ));
        }
        if self.n_test < 1 {
            return bad("n_test: need at least 1 replication".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha: must lie in (0, 1), got {}", self.alpha));
        }
        if self.workers == Some(0) {
            return bad("workers: must be at least 1".into());
        }
        if self.exports.densities && self.exports.density_grid < 2 {
            return bad("exports.density_grid: need at least 2 points".into());
        }
        Ok(Experiment {
            schema_version: self.schema_version,
            name: self.name.clone(),
            models,
            nulls,
            alternatives,
            statistics: self.statistics.clone(),
            n_calibration: self.n_calibration,
            n_test: self.n_test,
            alpha: self.alpha,
            master_seed: self.master_seed,
            exports: self.exports.clone(),
        })
    }
}

impl Experiment {
    /// SHA-256 of the canonical JSON serialization, in hex.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("experiment serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn model(&self, name: &str) -> Option<&ModelSpec> {
        self.models.iter().find(|m| m.name == name)
    }
}
