use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum accepted distance between a prediction and its ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    Samples(usize),
    /// Converted per ground-truth axle with that axle's velocity.
    Meters(f64),
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Samples(n) => write!(f, "{n}samples"),
            Threshold::Meters(m) => write!(f, "{}cm", (m * 100.0).round() as i64),
        }
    }
}

/// One ground-truth axle paired with one prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub gt_index: usize,
    pub pred_index: usize,
    /// `pred_index - gt_index`.
    pub temporal_error: i64,
    /// Metres, filled in by [`spatial_metrics`].
    pub spatial_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub matches: Vec<Match>,
    pub false_positives: Vec<usize>,
    pub false_negatives: Vec<usize>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_abs_temporal_error: f64,
    pub std_temporal_error: f64,
    pub mean_abs_spatial_error: Option<f64>,
    pub threshold: Threshold,
}

impl DetectionReport {
    pub fn true_positives(&self) -> usize {
        self.matches.len()
    }
}

/// Precision, recall and F1 from raw counts.
///
/// A signal with no ground truth and no predictions scores 1.0 on every
/// metric; otherwise an empty denominator scores 0.0.
pub fn prf(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    if tp + fp + fn_ == 0 {
        return (1.0, 1.0, 1.0);
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

/// One-to-one matching with a single sample threshold.
pub fn match_peaks(predicted: &[usize], ground_truth: &[usize], threshold: usize) -> DetectionReport {
    let per_gt = vec![threshold; ground_truth.len()];
    let mut report = match_with_thresholds(predicted, ground_truth, &per_gt);
    report.threshold = Threshold::Samples(threshold);
    report
}

/// One-to-one matching where each ground-truth axle carries its own sample
/// threshold. Pairs are accepted greedily by ascending distance (ties:
/// earlier ground truth, then earlier prediction); nothing is reused.
pub fn match_with_thresholds(
    predicted: &[usize],
    ground_truth: &[usize],
    gt_thresholds: &[usize],
) -> DetectionReport {
    assert_eq!(ground_truth.len(), gt_thresholds.len());
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for (g, (&gt, &thr)) in ground_truth.iter().zip(gt_thresholds).enumerate() {
        for (p, &pred) in predicted.iter().enumerate() {
            let d = gt.abs_diff(pred);
            if d <= thr {
                pairs.push((d, g, p));
            }
        }
    }
    pairs.sort_unstable();

    let mut gt_used = vec![false; ground_truth.len()];
    let mut pred_used = vec![false; predicted.len()];
    let mut matches = Vec::new();
    for (_, g, p) in pairs {
        if gt_used[g] || pred_used[p] {
            continue;
        }
        gt_used[g] = true;
        pred_used[p] = true;
        matches.push(Match {
            gt_index: ground_truth[g],
            pred_index: predicted[p],
            temporal_error: predicted[p] as i64 - ground_truth[g] as i64,
            spatial_error: None,
        });
    }
    matches.sort_by_key(|m| m.gt_index);

    let false_positives: Vec<usize> = predicted
        .iter()
        .zip(&pred_used)
        .filter_map(|(&p, &used)| (!used).then_some(p))
        .collect();
    let false_negatives: Vec<usize> = ground_truth
        .iter()
        .zip(&gt_used)
        .filter_map(|(&g, &used)| (!used).then_some(g))
        .collect();

    let (precision, recall, f1) = prf(matches.len(), false_positives.len(), false_negatives.len());
    let (mean_abs, std) = temporal_stats(&matches);
    DetectionReport {
        matches,
        false_positives,
        false_negatives,
        precision,
        recall,
        f1,
        mean_abs_temporal_error: mean_abs,
        std_temporal_error: std,
        mean_abs_spatial_error: None,
        threshold: Threshold::Samples(gt_thresholds.iter().copied().max().unwrap_or(0)),
    }
}

fn temporal_stats(matches: &[Match]) -> (f64, f64) {
    if matches.is_empty() {
        return (0.0, 0.0);
    }
    let n = matches.len() as f64;
    let mean_abs = matches.iter().map(|m| m.temporal_error.abs() as f64).sum::<f64>() / n;
    let mean = matches.iter().map(|m| m.temporal_error as f64).sum::<f64>() / n;
    let var = matches
        .iter()
        .map(|m| (m.temporal_error as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    (mean_abs, var.sqrt())
}

/// Sample threshold equivalent to `meters` for an axle moving at `velocity`.
pub fn meters_to_samples(meters: f64, velocity: f64, sample_rate: f64) -> usize {
    (meters * sample_rate / velocity).round().max(0.0) as usize
}

/// Match and score against ground truth under either threshold regime.
/// `velocities[i]` is the mean velocity of the axle at `ground_truth[i]`.
pub fn evaluate(
    predicted: &[usize],
    ground_truth: &[usize],
    velocities: &[f64],
    sample_rate: f64,
    threshold: Threshold,
) -> Result<DetectionReport> {
    if velocities.len() != ground_truth.len() {
        return Err(Error::InvalidInput(format!(
            "{} ground-truth axles but {} velocities",
            ground_truth.len(),
            velocities.len()
        )));
    }
    let mut report = match threshold {
        Threshold::Samples(n) => match_peaks(predicted, ground_truth, n),
        Threshold::Meters(m) => {
            let per_gt: Vec<usize> = velocities
                .iter()
                .map(|&v| meters_to_samples(m, v, sample_rate))
                .collect();
            let mut r = match_with_thresholds(predicted, ground_truth, &per_gt);
            r.threshold = threshold;
            r
        }
    };
    spatial_metrics(&mut report, ground_truth, velocities, sample_rate)?;
    Ok(report)
}

/// Convert temporal errors of matched axles into metres.
pub fn spatial_metrics(
    report: &mut DetectionReport,
    ground_truth: &[usize],
    velocities: &[f64],
    sample_rate: f64,
) -> Result<()> {
    let mut total = 0.0;
    for m in &mut report.matches {
        let slot = ground_truth
            .iter()
            .position(|&g| g == m.gt_index)
            .ok_or_else(|| Error::InvalidInput(format!("no ground truth at {}", m.gt_index)))?;
        let v = *velocities.get(slot).ok_or_else(|| {
            Error::InvalidInput(format!("missing velocity for axle at {}", m.gt_index))
        })?;
        let err = m.temporal_error as f64 * v / sample_rate;
        total += err.abs();
        m.spatial_error = Some(err);
    }
    report.mean_abs_spatial_error = if report.matches.is_empty() {
        Some(0.0)
    } else {
        Some(total / report.matches.len() as f64)
    };
    Ok(())
}

/// Minimum peak spacing in samples from the shortest wheel distance and the
/// highest expected velocity, rounded half-up.
pub fn min_distance_rule(min_wheel_distance: f64, v_max: f64, sample_rate: f64) -> usize {
    (min_wheel_distance * sample_rate / v_max + 0.5).floor() as usize
}
