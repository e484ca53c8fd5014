use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use axledet_core::detector::{split_passages, DatasetSplit, Example, SplitFractions};
use axledet_core::io::{list_passages, passage_paths, read_labels, read_passage, LABEL_SUFFIX};
use axledet_core::scalogram::{crossing_window, transform_passage, WaveletSpec};
use axledet_core::Scalogram;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::RunContext;
use crate::manifest::fingerprint_files;

pub const SCALOGRAM_DIR: &str = "scalograms";
pub const WAVELETS_FILE: &str = "wavelets.json";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SplitSelection {
    #[default]
    All,
    Train,
    Val,
    Test,
}

/// One sensor window with the velocities of its axles.
#[derive(Debug, Clone)]
pub struct Signal {
    pub example: Example,
    /// Velocity of each ground-truth axle, in ground-truth order.
    pub velocities: Vec<f64>,
    pub sample_rate: f64,
}

pub struct Dataset {
    pub signals: Vec<Signal>,
    /// Passages without a label file.
    pub unlabeled: Vec<String>,
}

impl Dataset {
    pub fn passage_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.signals.iter().map(|s| s.example.passage_id.clone()).collect();
        ids.dedup();
        ids
    }

    pub fn examples(&self) -> Vec<Example> {
        self.signals.iter().map(|s| s.example.clone()).collect()
    }

    /// Signals of the passages in `selection`, split by `fractions`/`seed`.
    pub fn select(&self, selection: SplitSelection, fractions: &SplitFractions, seed: u64) -> Vec<&Signal> {
        let split = split_passages(&self.passage_ids(), fractions, seed);
        let ids = match selection {
            SplitSelection::All => return self.signals.iter().collect(),
            SplitSelection::Train => split.train,
            SplitSelection::Val => split.val,
            SplitSelection::Test => split.test,
        };
        self.signals
            .iter()
            .filter(|s| DatasetSplit::contains(&ids, &s.example.passage_id))
            .collect()
    }
}

pub fn scalogram_file(id: &str, sensor: usize) -> String {
    format!("{id}_s{sensor}.scl")
}

/// Load every labeled passage and window/transform each sensor.
///
/// Scalograms come from `paths.scalograms` when that is set and
/// `use_cache` holds; the cache must have been built with the same
/// wavelet settings. The combined digest of all files read is recorded as
/// the `dataset` input of the run.
pub fn load_dataset(ctx: &mut RunContext, use_cache: bool) -> Result<Dataset> {
    let dataset_dir = ctx.cfg.paths.dataset.clone();
    let labels_dir = ctx.cfg.paths.labels_dir().to_path_buf();
    let cache = if use_cache { ctx.cfg.paths.scalograms.clone() } else { None };
    if let Some(dir) = &cache {
        check_cache(dir, &ctx.cfg.wavelets)?;
    }
    let ids = list_passages(&dataset_dir)
        .with_context(|| format!("listing passages in {}", dataset_dir.display()))?;
    if ids.is_empty() {
        bail!("no passages (*.meta.toml) found in {}", dataset_dir.display());
    }
    let specs = ctx.cfg.wavelets.clone();
    let loaded: Vec<Result<Option<(Vec<Signal>, Vec<PathBuf>)>>> = ctx.install(|| {
        ids.par_iter()
            .map(|id| load_passage(&dataset_dir, &labels_dir, cache.as_deref(), id, &specs))
            .collect()
    });

    let mut signals = Vec::new();
    let mut files = Vec::new();
    let mut unlabeled = Vec::new();
    for (id, item) in ids.iter().zip(loaded) {
        match item? {
            Some((s, f)) => {
                signals.extend(s);
                files.extend(f);
            }
            None => unlabeled.push(id.clone()),
        }
    }
    if signals.is_empty() {
        bail!("none of the {} passages in {} has labels in {}", ids.len(), dataset_dir.display(), labels_dir.display());
    }
    ctx.record_input("dataset", fingerprint_files(&files)?)?;
    Ok(Dataset { signals, unlabeled })
}

fn load_passage(
    dataset_dir: &Path,
    labels_dir: &Path,
    cache: Option<&Path>,
    id: &str,
    specs: &[WaveletSpec],
) -> Result<Option<(Vec<Signal>, Vec<PathBuf>)>> {
    let label_path = labels_dir.join(format!("{id}{LABEL_SUFFIX}"));
    if !label_path.exists() {
        return Ok(None);
    }
    let record = read_passage(dataset_dir, id)?;
    let doc = read_labels(labels_dir, id)?;
    if doc.n_samples != record.n_samples() || doc.n_sensors != record.n_sensors() {
        bail!(
            "labels of {id} describe {} samples x {} sensors, the recording has {} x {}",
            doc.n_samples,
            doc.n_sensors,
            record.n_samples(),
            record.n_sensors()
        );
    }
    let labels = doc.to_label_set()?;
    let (meta, matrix) = passage_paths(dataset_dir, id);
    let mut files = vec![meta, matrix, label_path];
    let mut signals = Vec::with_capacity(record.n_sensors());
    for sensor in 0..record.n_sensors() {
        let (scalogram, targets) = match cache {
            None => transform_passage(&record, &labels, sensor, specs)?,
            Some(dir) => {
                let path = dir.join(scalogram_file(id, sensor));
                let scalogram = Scalogram::read(&path)?;
                let crossings = labels.sensor_crossings(sensor);
                let window = crossing_window(&crossings, record.n_samples());
                if window != Some((scalogram.window_start, scalogram.n_samples())) {
                    bail!("cached scalogram {} does not match the current labels; re-run transform", path.display());
                }
                let start = scalogram.window_start;
                let targets = labels.targets.column(sensor).to_vec()[start..start + scalogram.n_samples()].to_vec();
                files.push(path);
                (scalogram, targets)
            }
        };
        signals.push(Signal {
            example: Example {
                passage_id: id.to_string(),
                sensor,
                scalogram,
                targets,
            },
            velocities: labels.axle_velocities.clone(),
            sample_rate: record.sample_rate,
        });
    }
    Ok(Some((signals, files)))
}

fn check_cache(dir: &Path, specs: &[WaveletSpec]) -> Result<()> {
    let path = dir.join(WAVELETS_FILE);
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("{} is not a scalogram cache (missing {WAVELETS_FILE})", dir.display()))?;
    let cached: Vec<WaveletSpec> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if cached != specs {
        bail!("scalogram cache {} was built with different wavelet settings", dir.display());
    }
    Ok(())
}
