use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::matching::{prf, DetectionReport};
use crate::error::{Error, Result};

/// A report tagged with the signal it was computed on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredSignal {
    pub passage_id: String,
    pub sensor: usize,
    pub report: DetectionReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Global,
    PerPassage,
    PerSensor,
    /// One group per (passage, sensor) signal.
    PerSignal,
}

/// Pooled counts and metrics for one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub key: String,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_abs_temporal_error: f64,
    pub std_temporal_error: f64,
    pub mean_abs_spatial_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q25: f64,
    pub median: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub group_by: GroupBy,
    pub groups: Vec<GroupMetrics>,
    pub precision: Quantiles,
    pub recall: Quantiles,
    pub f1: Quantiles,
}

/// Pool the reports of each group. Group order is sorted by key, so the
/// result does not depend on the order of `reports`.
pub fn aggregate(reports: &[ScoredSignal], group_by: GroupBy) -> Result<Summary> {
    if reports.is_empty() {
        return Err(Error::InvalidInput("cannot aggregate an empty report collection".into()));
    }
    let mut buckets: BTreeMap<String, Vec<&DetectionReport>> = BTreeMap::new();
    for r in reports {
        let key = match group_by {
            GroupBy::Global => "all".to_string(),
            GroupBy::PerPassage => r.passage_id.clone(),
            GroupBy::PerSensor => format!("sensor{:03}", r.sensor),
            GroupBy::PerSignal => format!("{}#{}", r.passage_id, r.sensor),
        };
        buckets.entry(key).or_default().push(&r.report);
    }
    let groups: Vec<GroupMetrics> = buckets
        .into_iter()
        .map(|(key, members)| pool(key, &members))
        .collect();
    let column = |f: fn(&GroupMetrics) -> f64| -> Quantiles {
        let mut v: Vec<f64> = groups.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        Quantiles {
            q25: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            mean: v.iter().sum::<f64>() / v.len() as f64,
        }
    };
    Ok(Summary {
        group_by,
        precision: column(|g| g.precision),
        recall: column(|g| g.recall),
        f1: column(|g| g.f1),
        groups,
    })
}

fn pool(key: String, members: &[&DetectionReport]) -> GroupMetrics {
    let tp: usize = members.iter().map(|r| r.matches.len()).sum();
    let fp: usize = members.iter().map(|r| r.false_positives.len()).sum();
    let fn_: usize = members.iter().map(|r| r.false_negatives.len()).sum();
    let (precision, recall, f1) = prf(tp, fp, fn_);

    let errors: Vec<f64> = members
        .iter()
        .flat_map(|r| r.matches.iter().map(|m| m.temporal_error as f64))
        .collect();
    let spatial: Vec<f64> = members
        .iter()
        .flat_map(|r| r.matches.iter().filter_map(|m| m.spatial_error))
        .collect();
    let (mean_abs, std) = if errors.is_empty() {
        (0.0, 0.0)
    } else {
        let n = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / n;
        let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
        (errors.iter().map(|e| e.abs()).sum::<f64>() / n, var.sqrt())
    };
    let mean_abs_spatial = if spatial.is_empty() {
        0.0
    } else {
        spatial.iter().map(|e| e.abs()).sum::<f64>() / spatial.len() as f64
    };
    GroupMetrics {
        key,
        tp,
        fp,
        fn_,
        precision,
        recall,
        f1,
        mean_abs_temporal_error: mean_abs,
        std_temporal_error: std,
        mean_abs_spatial_error: mean_abs_spatial,
    }
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::postprocess::matching::match_peaks;

    fn scored(id: &str, sensor: usize, pred: &[usize], gt: &[usize]) -> ScoredSignal {
        ScoredSignal {
            passage_id: id.into(),
            sensor,
            report: match_peaks(pred, gt, 20),
        }
    }

    #[test]
    fn single_report_global_equals_report() {
        let r = scored("p0", 0, &[105, 400], &[100, 200]);
        let s = aggregate(&[r.clone()], GroupBy::Global).unwrap();
        assert_eq!(s.groups.len(), 1);
        assert_eq!(s.groups[0].precision, r.report.precision);
        assert_eq!(s.groups[0].recall, r.report.recall);
        assert_eq!(s.groups[0].f1, r.report.f1);
    }

    #[test]
    fn pooled_counts() {
        let a = scored("p0", 0, &[100], &[100]); // (1,0,0)
        let b = scored("p1", 0, &[500], &[100]); // (0,1,1)
        let s = aggregate(&[a, b], GroupBy::Global).unwrap();
        assert_eq!(s.groups[0].precision, 0.5);
        assert_eq!(s.groups[0].recall, 0.5);
    }

    #[test]
    fn grouping_keys() {
        let rs = vec![
            scored("p0", 0, &[100], &[100]),
            scored("p0", 1, &[], &[100]),
            scored("p1", 0, &[100], &[100]),
        ];
        assert_eq!(aggregate(&rs, GroupBy::PerPassage).unwrap().groups.len(), 2);
        assert_eq!(aggregate(&rs, GroupBy::PerSensor).unwrap().groups.len(), 2);
        assert_eq!(aggregate(&rs, GroupBy::PerSignal).unwrap().groups.len(), 3);
    }

    #[test]
    fn empty_collection_is_an_error() {
        assert!(aggregate(&[], GroupBy::Global).is_err());
    }

    #[test]
    fn quantile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.25), 1.0);
        assert_eq!(quantile_sorted(&v, 0.5), 2.0);
        assert_eq!(quantile_sorted(&[0.0, 1.0], 0.25), 0.25);
    }
}
