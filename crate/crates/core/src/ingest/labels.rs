use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{LabelSet, PassageRecord};
use crate::error::{Error, Result};
use crate::postprocess::select_peaks;

/// Pulse detection settings for the wheel-load channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WheelLoadPeakParams {
    /// Fraction of the channel maximum a pulse must reach.
    pub min_height: f64,
    pub min_distance: usize,
}

impl Default for WheelLoadPeakParams {
    fn default() -> Self {
        Self {
            min_height: 0.25,
            min_distance: 20,
        }
    }
}

/// Axle pulses in one wheel-load channel, ascending.
pub fn detect_wheel_load_peaks(signal: &[f64], min_height: f64, min_distance: usize) -> Result<Vec<usize>> {
    if signal.is_empty() {
        return Err(Error::InvalidInput("empty wheel-load signal".into()));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("wheel-load signal contains non-finite samples".into()));
    }
    let max = signal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(select_peaks(signal, min_height * max, 0.0, min_distance))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PassageVerdict {
    Accepted,
    Rejected,
}

/// A passage is usable when both measuring points saw the same, non-zero
/// number of axles.
pub fn validate_passage(peaks_g1: &[usize], peaks_g2: &[usize]) -> PassageVerdict {
    if !peaks_g1.is_empty() && peaks_g1.len() == peaks_g2.len() {
        PassageVerdict::Accepted
    } else {
        PassageVerdict::Rejected
    }
}

/// Mean velocity of each axle between G1 and G2 (rank-paired pulses).
pub fn compute_axle_velocities(
    peaks_g1: &[usize],
    peaks_g2: &[usize],
    wlm_spacing: f64,
    sample_rate: f64,
) -> Result<Vec<f64>> {
    if peaks_g1.len() != peaks_g2.len() {
        return Err(Error::InvalidPassage(format!(
            "{} pulses at G1 but {} at G2",
            peaks_g1.len(),
            peaks_g2.len()
        )));
    }
    peaks_g1
        .iter()
        .zip(peaks_g2)
        .enumerate()
        .map(|(axle, (&g1, &g2))| {
            if g2 <= g1 {
                return Err(Error::InvalidPassage(format!(
                    "axle {axle} reaches G2 (sample {g2}) no later than G1 (sample {g1})"
                )));
            }
            Ok(wlm_spacing * sample_rate / (g2 - g1) as f64)
        })
        .collect()
}

/// `n_axles x n_sensors` sample indices at which each axle passes each
/// sensor, rounded to the nearest sample (ties away from zero).
pub fn compute_crossing_indices(
    peaks_g1: &[usize],
    velocities: &[f64],
    sensor_offsets: &[f64],
    sample_rate: f64,
    n_samples: usize,
) -> Result<Array2<usize>> {
    if peaks_g1.len() != velocities.len() {
        return Err(Error::InvalidInput(format!(
            "{} G1 pulses but {} velocities",
            peaks_g1.len(),
            velocities.len()
        )));
    }
    if let Some(v) = velocities.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidInput(format!("velocity {v} is not positive")));
    }
    let mut out = Array2::zeros((peaks_g1.len(), sensor_offsets.len()));
    for (axle, (&g1, &v)) in peaks_g1.iter().zip(velocities).enumerate() {
        for (sensor, &offset) in sensor_offsets.iter().enumerate() {
            let index = g1 as i64 + (offset * sample_rate / v).round() as i64;
            if index < 0 || index >= n_samples as i64 {
                return Err(Error::OutOfRange {
                    axle,
                    sensor,
                    index,
                    n_samples,
                });
            }
            out[[axle, sensor]] = index as usize;
        }
    }
    Ok(out)
}

/// Timing and distance uncertainties that propagate into label positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyBudget {
    /// Seconds; one sample period.
    pub dt: f64,
    pub wlm_spacing: f64,
    pub wlm_spacing_uncertainty: f64,
}

impl Default for UncertaintyBudget {
    fn default() -> Self {
        Self {
            dt: 1.0 / super::DEFAULT_SAMPLE_RATE,
            wlm_spacing: super::DEFAULT_WLM_SPACING,
            wlm_spacing_uncertainty: super::DEFAULT_WLM_SPACING_UNCERTAINTY,
        }
    }
}

/// Absolute position error of a crossing label by linear error propagation:
/// `v dt + offset (|v / s| dt + |1 / s| ds)`.
pub fn label_uncertainty(v: f64, offset: f64, budget: &UncertaintyBudget) -> f64 {
    let s = budget.wlm_spacing;
    v * budget.dt + offset * ((v / s).abs() * budget.dt + (1.0 / s).abs() * budget.wlm_spacing_uncertainty)
}

/// One-hot crossing targets, `n_samples x n_sensors`.
pub fn build_binary_labels(crossing_indices: &Array2<usize>, n_samples: usize) -> Result<Array2<u8>> {
    let mut targets = Array2::zeros((n_samples, crossing_indices.ncols()));
    for ((_, sensor), &index) in crossing_indices.indexed_iter() {
        if index >= n_samples {
            return Err(Error::InvalidLabels(format!(
                "sensor {sensor}: index {index} outside {n_samples} samples"
            )));
        }
        let cell = &mut targets[[index, sensor]];
        if *cell != 0 {
            return Err(Error::InvalidLabels(format!(
                "sensor {sensor}: two axles share sample {index}"
            )));
        }
        *cell = 1;
    }
    Ok(targets)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    PeakCountMismatch { g1: usize, g2: usize },
    NoAxles,
    InvalidOrder(String),
    OutOfRange(String),
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::PeakCountMismatch { g1, g2 } => {
                write!(f, "peak count mismatch: {g1} at G1, {g2} at G2")
            }
            RejectReason::NoAxles => write!(f, "no axles detected"),
            RejectReason::InvalidOrder(m) => write!(f, "inconsistent pulse order: {m}"),
            RejectReason::OutOfRange(m) => write!(f, "crossing outside recording: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LabelOutcome {
    Accepted(LabelSet),
    Rejected(RejectReason),
}

/// Derive the full label set of a passage from its wheel-load channels.
///
/// Data problems specific to this passage (unequal pulse counts,
/// misordered pulses, crossings beyond the recording) reject the passage;
/// malformed input is an error.
pub fn label_passage(record: &PassageRecord, params: &WheelLoadPeakParams) -> Result<LabelOutcome> {
    record.validate()?;
    let g1: Vec<f64> = record.wheel_load.column(0).to_vec();
    let g2: Vec<f64> = record.wheel_load.column(1).to_vec();
    let peaks_g1 = detect_wheel_load_peaks(&g1, params.min_height, params.min_distance)?;
    let peaks_g2 = detect_wheel_load_peaks(&g2, params.min_height, params.min_distance)?;

    if validate_passage(&peaks_g1, &peaks_g2) == PassageVerdict::Rejected {
        let reason = if peaks_g1.is_empty() && peaks_g2.is_empty() {
            RejectReason::NoAxles
        } else {
            RejectReason::PeakCountMismatch {
                g1: peaks_g1.len(),
                g2: peaks_g2.len(),
            }
        };
        return Ok(LabelOutcome::Rejected(reason));
    }

    let velocities = match compute_axle_velocities(&peaks_g1, &peaks_g2, record.wlm_spacing, record.sample_rate) {
        Ok(v) => v,
        Err(e) => return Ok(LabelOutcome::Rejected(RejectReason::InvalidOrder(e.to_string()))),
    };
    let crossing = match compute_crossing_indices(
        &peaks_g1,
        &velocities,
        &record.sensor_offsets,
        record.sample_rate,
        record.n_samples(),
    ) {
        Ok(c) => c,
        Err(e @ Error::OutOfRange { .. }) => {
            return Ok(LabelOutcome::Rejected(RejectReason::OutOfRange(e.to_string())))
        }
        Err(e) => return Err(e),
    };
    // Axles must keep their order at every sensor.
    for (s, col) in crossing.columns().into_iter().enumerate() {
        if col.iter().zip(col.iter().skip(1)).any(|(a, b)| a >= b) {
            return Ok(LabelOutcome::Rejected(RejectReason::InvalidOrder(format!(
                "axles overlap or swap order at sensor {s}"
            ))));
        }
    }

    let budget = record.uncertainty_budget();
    let uncertainty = Array2::from_shape_fn(crossing.dim(), |(a, s)| {
        label_uncertainty(velocities[a], record.sensor_offsets[s], &budget)
    });
    let targets = build_binary_labels(&crossing, record.n_samples())?;
    Ok(LabelOutcome::Accepted(LabelSet {
        axle_velocities: velocities,
        crossing_indices: crossing,
        uncertainty,
        targets,
    }))
}
