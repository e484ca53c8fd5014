//! Turning probability traces into axle detections and scoring them.

mod aggregate;
mod matching;
mod peaks;

pub use aggregate::{aggregate, quantile_sorted, GroupBy, GroupMetrics, Quantiles, ScoredSignal, Summary};
pub use matching::{
    evaluate, match_peaks, match_with_thresholds, meters_to_samples, min_distance_rule, prf,
    spatial_metrics, DetectionReport, Match, Threshold,
};
pub use peaks::{find_peaks, local_maxima, prominence, select_peaks, PeakParams};
