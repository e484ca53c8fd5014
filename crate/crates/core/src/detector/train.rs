use std::collections::BTreeSet;
use std::path::Path;

use ndarray::{s, ArrayView3};
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::loss::masked_focal_loss_logits;
use super::optim::Adam;
use super::tensor::Tensor;
use super::{batch_tensor, padded_length, sigmoid, DetectorModel};
use crate::error::{Error, Result};
use crate::postprocess::{find_peaks, match_peaks, prf, PeakParams};
use crate::scalogram::Scalogram;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.7,
            val: 0.2,
            test: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Focusing parameter of the focal loss.
    pub gamma: f64,
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub batch_size: usize,
    pub split: SplitFractions,
    pub split_seed: u64,
    /// Seeds batch sampling and cropping.
    pub seed: u64,
    pub learning_rate: f64,
    /// Train on random crops of at most this many samples.
    pub crop_length: Option<usize>,
    /// Sample threshold for the per-epoch validation F1.
    pub validation_threshold: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 2.5,
            epochs: 150,
            steps_per_epoch: 150,
            batch_size: 16,
            split: SplitFractions::default(),
            split_seed: 0,
            seed: 0,
            learning_rate: 1e-3,
            crop_length: None,
            validation_threshold: 20,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.split;
        if [s.train, s.val, s.test].iter().any(|f| !(*f >= 0.0)) || (s.train + s.val + s.test - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions must be non-negative and sum to 1, got {}/{}/{}",
                s.train, s.val, s.test
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be finite and >= 0, got {}", self.gamma)));
        }
        if self.epochs == 0 || self.steps_per_epoch == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs, steps_per_epoch and batch_size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if matches!(self.crop_length, Some(n) if n < 16) {
            return Err(Error::Config("crop_length must be at least 16".into()));
        }
        Ok(())
    }
}

/// One sensor window of one passage with its binary targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub passage_id: String,
    pub sensor: usize,
    pub scalogram: Scalogram,
    pub targets: Vec<u8>,
}

impl Example {
    pub fn ground_truth(&self) -> Vec<usize> {
        self.targets
            .iter()
            .enumerate()
            .filter(|(_, &y)| y == 1)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Passage ids per split, each list sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl DatasetSplit {
    pub fn contains(list: &[String], id: &str) -> bool {
        list.binary_search_by(|x| x.as_str().cmp(id)).is_ok()
    }
}

/// Deterministic passage-level split: ids are sorted, shuffled with
/// `seed`, and cut at `round(n * train)` and `round(n * (train + val))`.
pub fn split_passages(ids: &[String], fractions: &SplitFractions, seed: u64) -> DatasetSplit {
    let mut ids: Vec<String> = ids.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let n = ids.len();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((n as f64 * fractions.train).round() as usize).min(n);
    let n_val = ((n as f64 * (fractions.train + fractions.val)).round() as usize).clamp(n_train, n) - n_train;
    let sorted = |v: &[String]| {
        let mut v = v.to_vec();
        v.sort();
        v
    };
    DatasetSplit {
        train: sorted(&ids[..n_train]),
        val: sorted(&ids[n_train..n_train + n_val]),
        test: sorted(&ids[n_train + n_val..]),
    }
}

/// SHA-256 over every example's id, sensor, scalogram bytes and targets.
pub fn data_fingerprint(data: &[Example]) -> String {
    let mut h = Sha256::new();
    for e in data {
        h.update(e.passage_id.as_bytes());
        h.update((e.sensor as u64).to_le_bytes());
        h.update(e.scalogram.to_bytes());
        h.update(&e.targets);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub epoch: usize,
    pub loss: f64,
    pub val_precision: f64,
    pub val_recall: f64,
    pub val_f1: f64,
    pub val_predictions: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Weights from the epoch with the best validation F1.
    pub model: DetectorModel,
    pub history: Vec<HistoryRow>,
    pub best_epoch: usize,
    pub best: HistoryRow,
    /// The kept checkpoint produced no peaks at all on validation data.
    pub collapsed: bool,
    pub split: DatasetSplit,
}

/// Pooled validation score of a model over a set of examples.
pub fn score_examples(
    model: &DetectorModel,
    examples: &[&Example],
    peaks: &PeakParams,
    threshold: usize,
) -> Result<(f64, f64, f64, usize)> {
    let (mut tp, mut fp, mut fn_, mut n_pred) = (0, 0, 0, 0);
    for e in examples {
        let p = model.predict(&e.scalogram)?;
        let pred = find_peaks(&p, peaks);
        let report = match_peaks(&pred, &e.ground_truth(), threshold);
        n_pred += pred.len();
        tp += report.true_positives();
        fp += report.false_positives.len();
        fn_ += report.false_negatives.len();
    }
    let (precision, recall, f1) = prf(tp, fp, fn_);
    Ok((precision, recall, f1, n_pred))
}

pub fn train(model: DetectorModel, data: &[Example], cfg: &TrainConfig, peaks: &PeakParams) -> Result<TrainOutcome> {
    train_with_progress(model, data, cfg, peaks, &mut |_| {})
}

/// Trains `model`, calling `progress` after each epoch's validation.
/// Epoch numbers continue from `model.manifest.epochs_completed`.
pub fn train_with_progress(
    mut model: DetectorModel,
    data: &[Example],
    cfg: &TrainConfig,
    peaks: &PeakParams,
    progress: &mut dyn FnMut(&HistoryRow),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    peaks.validate()?;
    let mcfg = *model.config();
    for e in data {
        let (n_s, n_f, n_t) = e.scalogram.data.dim();
        if n_f != mcfg.input_scales || n_t != mcfg.input_channels || e.targets.len() != n_s || n_s == 0 {
            return Err(Error::InvalidInput(format!(
                "example {}/{} has shape {n_s}x{n_f}x{n_t} with {} targets",
                e.passage_id,
                e.sensor,
                e.targets.len()
            )));
        }
    }
    let ids: Vec<String> = data.iter().map(|e| e.passage_id.clone()).collect();
    let split = split_passages(&ids, &cfg.split, cfg.split_seed);
    let train_set: Vec<&Example> = data.iter().filter(|e| DatasetSplit::contains(&split.train, &e.passage_id)).collect();
    let val_set: Vec<&Example> = data.iter().filter(|e| DatasetSplit::contains(&split.val, &e.passage_id)).collect();
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::Config(format!(
            "empty split: {} training and {} validation windows from {} passages",
            train_set.len(),
            val_set.len(),
            split.train.len() + split.val.len() + split.test.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut opt = Adam::new(cfg.learning_rate);
    let multiple = mcfg.time_multiple();
    let first_epoch = model.manifest.epochs_completed + 1;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(HistoryRow, super::Network)> = None;

    for epoch in first_epoch..first_epoch + cfg.epochs {
        let mut loss_sum = 0.0;
        for step in 1..=cfg.steps_per_epoch {
            let batch: Vec<(&Example, usize, usize)> = (0..cfg.batch_size)
                .map(|_| {
                    let e = train_set[rng.random_range(0..train_set.len())];
                    let n = e.targets.len();
                    match cfg.crop_length {
                        Some(len) if n > len => (e, rng.random_range(0..=n - len), len),
                        _ => (e, 0, n),
                    }
                })
                .collect();
            let len = padded_length(batch.iter().map(|b| b.2).max().unwrap_or(1), multiple);
            let views: Vec<ArrayView3<f32>> = batch
                .iter()
                .map(|(e, start, n)| e.scalogram.data.slice(s![*start..*start + *n, .., ..]))
                .collect();
            let x = batch_tensor(&views, len);
            let mut targets = vec![0u8; batch.len() * len];
            let mut mask = vec![false; batch.len() * len];
            for (i, (e, start, n)) in batch.iter().enumerate() {
                targets[i * len..i * len + n].copy_from_slice(&e.targets[*start..*start + *n]);
                mask[i * len..i * len + n].iter_mut().for_each(|m| *m = true);
            }
            let logits = model.network.forward(&x);
            let p: Vec<f32> = logits.data.iter().map(|&z| sigmoid(z)).collect();
            let (loss, grad) = masked_focal_loss_logits(&p, &targets, &mask, cfg.gamma);
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch, step, loss });
            }
            loss_sum += loss;
            model.network.backward(&Tensor::from_vec(batch.len(), 1, len, 1, grad));
            opt.step(&mut model.network);
        }
        let (val_precision, val_recall, val_f1, val_predictions) =
            score_examples(&model, &val_set, peaks, cfg.validation_threshold)?;
        let row = HistoryRow {
            epoch,
            loss: loss_sum / cfg.steps_per_epoch as f64,
            val_precision,
            val_recall,
            val_f1,
            val_predictions,
        };
        progress(&row);
        if best.as_ref().is_none_or(|(b, _)| row.val_f1 > b.val_f1) {
            best = Some((row.clone(), model.network.clone()));
        }
        history.push(row);
    }

    let (best_row, network) = best.expect("at least one epoch");
    model.network = network;
    model.manifest.train_config = Some(cfg.clone());
    model.manifest.data_fingerprint = data_fingerprint(data);
    model.manifest.epochs_completed = first_epoch + cfg.epochs - 1;
    model.manifest.best_epoch = best_row.epoch;
    model.manifest.toolkit_version = crate::VERSION.to_string();
    Ok(TrainOutcome {
        model,
        best_epoch: best_row.epoch,
        collapsed: best_row.val_predictions == 0,
        best: best_row,
        history,
        split,
    })
}

/// History CSV with columns `epoch,loss,val_precision,val_recall,val_F1`.
pub fn write_history_csv(path: &Path, history: &[HistoryRow]) -> Result<()> {
    let mut out = String::from("epoch,loss,val_precision,val_recall,val_F1\n");
    for r in history {
        out.push_str(&format!(
            "{},{:.8},{:.6},{:.6},{:.6}\n",
            r.epoch, r.loss, r.val_precision, r.val_recall, r.val_f1
        ));
    }
    crate::io::write_atomic(path, out.as_bytes())
}
