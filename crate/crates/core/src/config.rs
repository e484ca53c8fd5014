//! Run configuration: one TOML document holding every tunable of the
//! pipeline. Missing keys take their defaults, and [`RunConfig::to_toml`]
//! writes the fully materialized document back out.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detector::{ModelConfig, TrainConfig};
use crate::error::{Error, Result};
use crate::ingest::WheelLoadPeakParams;
use crate::postprocess::PeakParams;
use crate::scalogram::{default_specs, WaveletSpec};
use crate::synth::SynthDatasetConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Passage files (`<id>.csv`, `<id>.meta.toml`, `<id>.labels.json`).
    pub dataset: PathBuf,
    /// Directory holding the `<id>.labels.json` files; the dataset
    /// directory when absent.
    pub labels: Option<PathBuf>,
    /// Scalogram cache written by `transform`; computed on the fly when absent.
    pub scalograms: Option<PathBuf>,
    pub output: PathBuf,
    /// Trained model to load for `predict`/`evaluate`, or to resume from.
    pub checkpoint: Option<PathBuf>,
}

impl PathsConfig {
    pub fn labels_dir(&self) -> &Path {
        self.labels.as_deref().unwrap_or(&self.dataset)
    }
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::from("data"),
            labels: None,
            scalograms: None,
            output: PathBuf::from("runs"),
            checkpoint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub sample_thresholds: Vec<usize>,
    /// Spatial thresholds in metres, converted per axle.
    pub meter_thresholds: Vec<f64>,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self {
            sample_thresholds: vec![20],
            meter_thresholds: vec![2.0, 0.37, 0.20],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub gammas: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            gammas: vec![0.0, 0.5, 1.0, 2.0, 2.5, 3.0, 5.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub deterministic: bool,
    /// Worker threads for per-passage work; 0 picks the available parallelism.
    pub workers: usize,
    pub paths: PathsConfig,
    pub synth: SynthDatasetConfig,
    pub labels: WheelLoadPeakParams,
    pub wavelets: Vec<WaveletSpec>,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub peaks: PeakParams,
    pub evaluate: EvaluateConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            deterministic: false,
            workers: 0,
            paths: PathsConfig::default(),
            synth: SynthDatasetConfig::default(),
            labels: WheelLoadPeakParams::default(),
            wavelets: default_specs(),
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            peaks: PeakParams::default(),
            evaluate: EvaluateConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.wavelets.len() != self.model.input_channels {
            return Err(Error::Config(format!(
                "{} wavelet settings but the model expects {} input channels",
                self.wavelets.len(),
                self.model.input_channels
            )));
        }
        for w in &self.wavelets {
            w.validate()?;
            if w.n_scales != self.model.input_scales {
                return Err(Error::Config(format!(
                    "wavelet {} uses {} scales but the model expects {}",
                    w.family, w.n_scales, self.model.input_scales
                )));
            }
        }
        self.model.validate()?;
        self.train.validate()?;
        self.peaks.validate()?;
        if self.evaluate.meter_thresholds.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::Config("meter thresholds must be positive".into()));
        }
        if self.sweep.gammas.iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::Config("sweep gammas must be >= 0".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_toml()?.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let cfg = RunConfig::from_toml("seed = 5\n[train]\ngamma = 3.0\n").unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.train.gamma, 3.0);
        assert_eq!(cfg.train.epochs, 150);
        assert_eq!((cfg.train.steps_per_epoch, cfg.train.batch_size), (150, 16));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("sed = 5\n").is_err());
    }

    #[test]
    fn mismatched_channels_rejected() {
        let mut cfg = RunConfig::default();
        cfg.wavelets.pop();
        assert!(cfg.validate().is_err());
    }
}
