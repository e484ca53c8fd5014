//! Prominence-gated peak picking.
//!
//! Candidates are strict local maxima (flat tops resolve to their midpoint,
//! left-biased when the plateau has even width). Candidates then pass three
//! gates in order: absolute height, topographic prominence, and minimum
//! spacing. Spacing is enforced greedily from the highest candidate down;
//! equal heights are visited lowest index first. Two kept peaks are always
//! at least `min_distance` samples apart.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gates applied to detector probability traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeakParams {
    /// Minimum peak value.
    pub min_height: f64,
    /// Minimum spacing between two accepted peaks, in samples.
    pub min_distance: usize,
    /// Minimum topographic prominence.
    pub min_prominence: f64,
}

impl Default for PeakParams {
    fn default() -> Self {
        Self {
            min_height: 0.25,
            min_distance: 20,
            min_prominence: 0.15,
        }
    }
}

impl PeakParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_height > 0.0 && self.min_height <= 1.0) {
            return Err(Error::Config(format!(
                "min_height must lie in (0, 1], got {}",
                self.min_height
            )));
        }
        if self.min_distance < 1 {
            return Err(Error::Config("min_distance must be at least 1".into()));
        }
        if !(self.min_prominence >= 0.0) {
            return Err(Error::Config(format!(
                "min_prominence must be non-negative, got {}",
                self.min_prominence
            )));
        }
        Ok(())
    }
}

/// Peak picking on a probability trace with the detector gates.
pub fn find_peaks(trace: &[f32], params: &PeakParams) -> Vec<usize> {
    let trace: Vec<f64> = trace.iter().map(|&v| v as f64).collect();
    select_peaks(
        &trace,
        params.min_height,
        params.min_prominence,
        params.min_distance,
    )
}

/// Strict local maxima; plateaus report their (left-biased) midpoint.
/// The first and last samples are never maxima.
pub fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    if x.len() < 3 {
        return peaks;
    }
    let last = x.len() - 1;
    let mut i = 1;
    while i < last {
        if x[i - 1] < x[i] {
            let mut ahead = i + 1;
            while ahead < last && x[ahead] == x[i] {
                ahead += 1;
            }
            if x[ahead] < x[i] {
                let right = ahead - 1;
                peaks.push((i + right) / 2);
                i = ahead;
                continue;
            }
        }
        i += 1;
    }
    peaks
}

/// Topographic prominence of the sample at `peak`: its height above the
/// higher of the two lowest points reachable on either side before meeting
/// strictly higher terrain or the trace edge.
pub fn prominence(x: &[f64], peak: usize) -> f64 {
    let height = x[peak];
    let mut left_min = height;
    for &v in x[..peak].iter().rev() {
        if v > height {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = height;
    for &v in &x[peak + 1..] {
        if v > height {
            break;
        }
        right_min = right_min.min(v);
    }
    height - left_min.max(right_min)
}

/// Full gate sequence with an absolute height threshold.
pub fn select_peaks(
    x: &[f64],
    min_height: f64,
    min_prominence: f64,
    min_distance: usize,
) -> Vec<usize> {
    let candidates: Vec<usize> = local_maxima(x)
        .into_iter()
        .filter(|&i| x[i] >= min_height)
        .filter(|&i| prominence(x, i) >= min_prominence)
        .collect();
    enforce_distance(x, &candidates, min_distance)
}

/// Greedy suppression by descending height (ties: lower index first).
/// `candidates` must be ascending; the result is ascending.
fn enforce_distance(x: &[f64], candidates: &[usize], min_distance: usize) -> Vec<usize> {
    if min_distance <= 1 || candidates.len() < 2 {
        return candidates.to_vec();
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        x[candidates[b]]
            .total_cmp(&x[candidates[a]])
            .then(candidates[a].cmp(&candidates[b]))
    });
    let mut keep = vec![true; candidates.len()];
    for &slot in &order {
        if !keep[slot] {
            continue;
        }
        let pos = candidates[slot];
        // Candidates are sorted, so neighbours within range are contiguous.
        let mut j = slot;
        while j > 0 && pos - candidates[j - 1] < min_distance {
            j -= 1;
            keep[j] = false;
        }
        let mut j = slot + 1;
        while j < candidates.len() && candidates[j] - pos < min_distance {
            keep[j] = false;
            j += 1;
        }
    }
    candidates
        .iter()
        .zip(keep)
        .filter_map(|(&c, k)| k.then_some(c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(len: usize, center: usize, height: f64, half_width: usize) -> Vec<f64> {
        (0..len)
            .map(|i| {
                let d = (i as f64 - center as f64).abs();
                (height * (1.0 - d / half_width as f64)).max(0.0)
            })
            .collect()
    }

    #[test]
    fn constant_trace_has_no_peaks() {
        let x = vec![0.4f32; 50];
        assert!(find_peaks(&x, &PeakParams::default()).is_empty());
    }

    #[test]
    fn single_triangle() {
        let x: Vec<f32> = triangle(100, 40, 0.9, 10).iter().map(|&v| v as f32).collect();
        assert_eq!(find_peaks(&x, &PeakParams::default()), vec![40]);
    }

    #[test]
    fn higher_peak_suppresses_close_neighbour() {
        let mut x = triangle(120, 50, 0.8, 5);
        for (v, w) in x.iter_mut().zip(triangle(120, 60, 0.5, 5)) {
            *v = v.max(w);
        }
        assert_eq!(select_peaks(&x, 0.25, 0.15, 20), vec![50]);
        // with a short spacing rule both survive
        assert_eq!(select_peaks(&x, 0.25, 0.15, 5), vec![50, 60]);
    }

    #[test]
    fn low_prominence_bump_on_plateau_is_rejected() {
        let mut x = vec![0.2; 60];
        x[30] = 0.3;
        x[29] = 0.25;
        x[31] = 0.25;
        assert!((prominence(&x, 30) - 0.1).abs() < 1e-12);
        assert!(select_peaks(&x, 0.25, 0.15, 20).is_empty());
    }

    #[test]
    fn plateau_midpoint_is_left_biased() {
        let x = [0.0, 1.0, 1.0, 1.0, 1.0, 0.0];
        assert_eq!(local_maxima(&x), vec![2]);
        let x = [0.0, 1.0, 1.0, 1.0, 0.0];
        assert_eq!(local_maxima(&x), vec![2]);
    }

    #[test]
    fn plateau_running_into_edge_is_not_a_peak() {
        assert!(local_maxima(&[0.0, 1.0, 1.0]).is_empty());
        assert!(local_maxima(&[1.0, 1.0, 0.0]).is_empty());
    }

    #[test]
    fn equal_heights_keep_lower_index() {
        let x = [0.0, 1.0, 0.0, 1.0, 0.0];
        assert_eq!(select_peaks(&x, 0.5, 0.0, 3), vec![1]);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = PeakParams::default();
        p.min_height = 0.0;
        assert!(p.validate().is_err());
        p = PeakParams::default();
        p.min_distance = 0;
        assert!(p.validate().is_err());
        p = PeakParams::default();
        p.min_prominence = f64::NAN;
        assert!(p.validate().is_err());
        assert!(PeakParams::default().validate().is_ok());
    }
}
