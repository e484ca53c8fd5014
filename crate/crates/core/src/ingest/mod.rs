//! Passage recordings and axle ground truth.
//!
//! Two rail-mounted wheel-load measuring points G1 and G2, `wlm_spacing`
//! metres apart, each register one pulse per axle. Pairing the i-th pulse
//! at G1 with the i-th pulse at G2 gives the mean velocity of axle i, and
//! from that the sample at which the axle passes each accelerometer.

mod labels;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use labels::{
    build_binary_labels, compute_axle_velocities, compute_crossing_indices,
    detect_wheel_load_peaks, label_passage, label_uncertainty, validate_passage, LabelOutcome,
    PassageVerdict, RejectReason, UncertaintyBudget, WheelLoadPeakParams,
};

pub const DEFAULT_SAMPLE_RATE: f64 = 600.0;
pub const DEFAULT_WLM_SPACING: f64 = 14.40;
pub const DEFAULT_WLM_SPACING_UNCERTAINTY: f64 = 0.20;

/// One crossing event: accelerations of every sensor plus both wheel-load
/// channels, sampled together.
#[derive(Debug, Clone, PartialEq)]
pub struct PassageRecord {
    pub id: String,
    pub sample_rate: f64,
    /// `n_samples x n_sensors`, m/s².
    pub accel: Array2<f64>,
    /// `n_samples x 2`, columns G1 and G2.
    pub wheel_load: Array2<f64>,
    /// Distance from G1 to each accelerometer, metres.
    pub sensor_offsets: Vec<f64>,
    pub wlm_spacing: f64,
    pub wlm_spacing_uncertainty: f64,
}

impl PassageRecord {
    pub fn n_samples(&self) -> usize {
        self.accel.nrows()
    }

    pub fn n_sensors(&self) -> usize {
        self.accel.ncols()
    }

    pub fn sensor_signal(&self, sensor: usize) -> ArrayView1<'_, f64> {
        self.accel.column(sensor)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPassage(format!("{}: {msg}", self.id)));
        if self.n_samples() == 0 {
            return bad("no samples".into());
        }
        if self.n_sensors() == 0 {
            return bad("no acceleration sensors".into());
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return bad(format!("sample rate {} is not positive", self.sample_rate));
        }
        if self.wheel_load.nrows() != self.n_samples() || self.wheel_load.ncols() != 2 {
            return bad(format!(
                "wheel-load matrix is {}x{}, expected {}x2",
                self.wheel_load.nrows(),
                self.wheel_load.ncols(),
                self.n_samples()
            ));
        }
        if self.sensor_offsets.len() != self.n_sensors() {
            return bad(format!(
                "{} sensor offsets for {} sensors",
                self.sensor_offsets.len(),
                self.n_sensors()
            ));
        }
        if let Some(o) = self.sensor_offsets.iter().find(|o| !(o.is_finite() && **o >= 0.0)) {
            return bad(format!("sensor offset {o} must be finite and non-negative"));
        }
        if !(self.wlm_spacing > 0.0 && self.wlm_spacing.is_finite()) {
            return bad(format!("wheel-load spacing {} is not positive", self.wlm_spacing));
        }
        Ok(())
    }

    pub fn uncertainty_budget(&self) -> UncertaintyBudget {
        UncertaintyBudget {
            dt: 1.0 / self.sample_rate,
            wlm_spacing: self.wlm_spacing,
            wlm_spacing_uncertainty: self.wlm_spacing_uncertainty,
        }
    }
}

/// Axle ground truth for one passage.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    /// Mean velocity of each axle, m/s.
    pub axle_velocities: Vec<f64>,
    /// `n_axles x n_sensors` sample indices.
    pub crossing_indices: Array2<usize>,
    /// `n_axles x n_sensors` position uncertainty, metres.
    pub uncertainty: Array2<f64>,
    /// `n_samples x n_sensors` one-hot crossing targets.
    pub targets: Array2<u8>,
}

impl LabelSet {
    pub fn n_axles(&self) -> usize {
        self.axle_velocities.len()
    }

    pub fn n_sensors(&self) -> usize {
        self.crossing_indices.ncols()
    }

    /// Crossing indices of every axle at `sensor`, ascending.
    pub fn sensor_crossings(&self, sensor: usize) -> Vec<usize> {
        self.crossing_indices.column(sensor).to_vec()
    }

    pub fn validate(&self, n_samples: usize) -> Result<()> {
        let n_a = self.n_axles();
        if self.crossing_indices.nrows() != n_a || self.uncertainty.dim() != self.crossing_indices.dim() {
            return Err(Error::InvalidLabels("matrix dimensions disagree with axle count".into()));
        }
        if self.axle_velocities.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidLabels("velocities must be positive".into()));
        }
        for (s, col) in self.crossing_indices.columns().into_iter().enumerate() {
            if col.iter().any(|&i| i >= n_samples) {
                return Err(Error::InvalidLabels(format!("sensor {s}: crossing outside recording")));
            }
            if col.windows(2).into_iter().any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidLabels(format!(
                    "sensor {s}: crossings are not strictly increasing"
                )));
            }
        }
        if self.targets.dim() != (n_samples, self.n_sensors()) {
            return Err(Error::InvalidLabels("target matrix has wrong shape".into()));
        }
        Ok(())
    }
}

/// Accepted/rejected bookkeeping over a dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestStats {
    pub total: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub rejected_ids: Vec<(String, String)>,
    pub accepted_axles: usize,
}

impl IngestStats {
    pub fn record(&mut self, id: &str, outcome: &LabelOutcome) {
        self.total += 1;
        match outcome {
            LabelOutcome::Accepted(labels) => {
                self.accepted += 1;
                self.accepted_axles += labels.n_axles();
            }
            LabelOutcome::Rejected(reason) => {
                self.rejected += 1;
                self.rejected_ids.push((id.to_string(), reason.to_string()));
            }
        }
    }

    pub fn accepted_ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.accepted as f64 / self.total as f64
        }
    }
}
