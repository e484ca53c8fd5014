//! Per-sample axle classifier.
//!
//! A fully convolutional encoder/decoder maps a `(time, scale, transform)`
//! scalogram to one probability per time step. The encoder pools time and
//! frequency together until frequency collapses to one bin; the decoder
//! upsamples time only and receives every encoder output with its
//! frequency axis folded into channels. Inputs of any length are padded to
//! a multiple of `2^depth` and the output is cropped back.

mod checkpoint;
mod layers;
mod loss;
mod model;
mod optim;
mod tensor;
mod train;

use ndarray::{Array3, ArrayView3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalogram::Scalogram;

pub use checkpoint::{checkpoint_bytes, checkpoint_from_bytes, read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use layers::{Param, Visit};
pub use loss::{focal_loss, focal_term, focal_term_grad, focal_term_grad_logit, masked_focal_loss_logits, EPS};
pub use model::{ForwardTrace, ModelConfig, Network};
pub use optim::Adam;
pub use tensor::Tensor;
pub use train::{
    data_fingerprint, score_examples, split_passages, train, train_with_progress, write_history_csv, DatasetSplit, Example,
    HistoryRow, SplitFractions, TrainConfig, TrainOutcome,
};

/// Provenance stored alongside trained weights.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingManifest {
    pub train_config: Option<TrainConfig>,
    pub data_fingerprint: String,
    pub seed: u64,
    pub epochs_completed: usize,
    pub best_epoch: usize,
    pub toolkit_version: String,
}

/// A network plus its configuration and training provenance.
#[derive(Debug, Clone)]
pub struct DetectorModel {
    pub network: Network,
    pub manifest: TrainingManifest,
}

impl DetectorModel {
    /// Freshly initialized model; `seed` drives the weight initialization.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        Ok(Self {
            network: Network::new(config, seed)?,
            manifest: TrainingManifest {
                seed,
                toolkit_version: crate::VERSION.to_string(),
                ..Default::default()
            },
        })
    }

    pub fn config(&self) -> &ModelConfig {
        self.network.config()
    }

    /// Probability per time step, same length as the scalogram.
    pub fn predict(&self, scalogram: &Scalogram) -> Result<Vec<f32>> {
        Ok(self.predict_traced(scalogram)?.0)
    }

    /// [`DetectorModel::predict`] plus the tensor shapes seen inside the network.
    pub fn predict_traced(&self, scalogram: &Scalogram) -> Result<(Vec<f32>, ForwardTrace)> {
        let cfg = self.config();
        let (n_s, n_f, n_t) = scalogram.data.dim();
        if n_f != cfg.input_scales || n_t != cfg.input_channels {
            return Err(Error::InvalidInput(format!(
                "scalogram has {n_f} scales x {n_t} transforms, model expects {} x {}",
                cfg.input_scales, cfg.input_channels
            )));
        }
        if n_s == 0 {
            return Err(Error::InvalidInput("empty scalogram".into()));
        }
        let padded = padded_length(n_s, cfg.time_multiple());
        let x = batch_tensor(&[scalogram.data.view()], padded);
        let (logits, trace) = self.network.infer_traced(&x);
        Ok((logits.data[..n_s].iter().map(|&z| sigmoid(z)).collect(), trace))
    }
}

#[inline]
pub fn sigmoid(z: f32) -> f32 {
    1.0 / (1.0 + (-z).exp())
}

/// Least multiple of `multiple` that is `>= len` (and at least `multiple`).
pub fn padded_length(len: usize, multiple: usize) -> usize {
    len.max(1).div_ceil(multiple) * multiple
}

/// Zero-pads the time axis of an `(n_s, n_f, n_t)` scalogram to the next
/// multiple of 16; returns the padded array and the original length.
pub fn pad_to_multiple_of_16(data: &Array3<f32>) -> (Array3<f32>, usize) {
    let (n_s, n_f, n_t) = data.dim();
    let mut out = Array3::zeros((padded_length(n_s, 16), n_f, n_t));
    out.slice_mut(ndarray::s![..n_s, .., ..]).assign(data);
    (out, n_s)
}

/// Stacks `(n_s, n_f, n_t)` scalograms into a `[batch][n_t][len][n_f]`
/// tensor, zero-padding each along time to `len`.
pub fn batch_tensor(items: &[ArrayView3<'_, f32>], len: usize) -> Tensor {
    let (_, n_f, n_t) = items[0].dim();
    let mut x = Tensor::zeros(items.len(), n_t, len, n_f);
    for (n, item) in items.iter().enumerate() {
        for ((t, f, c), &v) in item.indexed_iter() {
            if t < len {
                let i = x.idx(n, c, t, f);
                x.data[i] = v;
            }
        }
    }
    x
}
