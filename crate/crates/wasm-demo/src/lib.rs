//! Browser bindings for the demo page in `www/`.
//!
//! The page drives three views: the six-channel scalogram of a synthetic
//! crossing, peak picking on a detector-like probability trace with live
//! gate settings, and the focal loss and label uncertainty curves.

use axledet_core::detector::focal_term;
use axledet_core::ingest::{label_uncertainty, UncertaintyBudget};
use axledet_core::postprocess::{find_peaks, match_peaks, min_distance_rule, PeakParams};
use axledet_core::scalogram::{default_specs, transform_passage};
use axledet_core::synth::{simulate_passage, SynthDatasetConfig};
use axledet_core::Scalogram;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// One synthetic crossing seen by the first sensor, windowed around its axles.
#[wasm_bindgen]
pub struct DemoPassage {
    signal: Vec<f64>,
    scalogram: Scalogram,
    crossings: Vec<u32>,
    channel_names: Vec<String>,
}

#[wasm_bindgen]
impl DemoPassage {
    #[wasm_bindgen(constructor)]
    pub fn new(velocity: f64, n_axles: u32, noise_fraction: f64, seed: u32) -> Result<DemoPassage, JsError> {
        let n = n_axles as usize;
        let cfg = SynthDatasetConfig {
            n_passages: 1,
            min_axles: n,
            max_axles: n,
            min_velocity: velocity,
            max_velocity: velocity,
            noise_fraction,
            seed: seed as u64,
            ..SynthDatasetConfig::default()
        };
        cfg.validate().map_err(js_err)?;
        let (record, labels) = simulate_passage(&cfg.scenario(0)).map_err(js_err)?;
        let specs = default_specs();
        let (scalogram, targets) = transform_passage(&record, &labels, 0, &specs).map_err(js_err)?;
        let start = scalogram.window_start;
        let signal = record.accel.column(0).to_vec()[start..start + scalogram.n_samples()].to_vec();
        let crossings = targets
            .iter()
            .enumerate()
            .filter(|(_, &y)| y == 1)
            .map(|(i, _)| i as u32)
            .collect();
        Ok(DemoPassage {
            signal,
            scalogram,
            crossings,
            channel_names: specs
                .iter()
                .map(|s| format!("{} {}-{}", s.family, s.scale_min, s.scale_max))
                .collect(),
        })
    }

    pub fn n_samples(&self) -> usize {
        self.scalogram.n_samples()
    }

    pub fn n_scales(&self) -> usize {
        self.scalogram.n_scales()
    }

    pub fn n_channels(&self) -> usize {
        self.scalogram.n_transforms()
    }

    pub fn channel_name(&self, channel: usize) -> String {
        self.channel_names.get(channel).cloned().unwrap_or_default()
    }

    /// Windowed acceleration, m/s².
    pub fn signal(&self) -> Vec<f64> {
        self.signal.clone()
    }

    /// One channel as a scale-major `n_scales x n_samples` image.
    pub fn channel(&self, channel: usize) -> Vec<f32> {
        let (n_s, n_f, n_t) = self.scalogram.data.dim();
        if channel >= n_t {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(n_s * n_f);
        for f in 0..n_f {
            out.extend((0..n_s).map(|t| self.scalogram.data[[t, f, channel]]));
        }
        out
    }

    /// Axle crossing samples within the window.
    pub fn crossings(&self) -> Vec<u32> {
        self.crossings.clone()
    }

    /// A stand-in for detector output: a bump of random height at every
    /// crossing, jittered by up to `jitter` samples, plus `clutter` random
    /// spurious bumps and uniform noise of amplitude `noise`.
    pub fn probability_trace(&self, jitter: u32, clutter: u32, noise: f32, seed: u32) -> Vec<f32> {
        let n = self.n_samples();
        let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
        let mut trace: Vec<f32> = (0..n).map(|_| rng.random_range(0.0..=noise.max(0.0))).collect();
        let mut bump = |centre: f64, height: f32, width: f64| {
            for (i, v) in trace.iter_mut().enumerate() {
                let u = (i as f64 - centre) / width;
                *v = v.max(height * (-0.5 * u * u).exp() as f32);
            }
        };
        for &c in &self.crossings {
            let j = jitter as i64;
            let shift = if j > 0 { rng.random_range(-j..=j) } else { 0 };
            let height = rng.random_range(0.45f32..0.95);
            bump(c as f64 + shift as f64, height, 3.0);
        }
        for _ in 0..clutter {
            let centre = rng.random_range(0.0..n as f64);
            let height = rng.random_range(0.1f32..0.5);
            bump(centre, height, 2.0);
        }
        trace
    }
}

/// Peak indices of `trace` under the given gates.
#[wasm_bindgen]
pub fn pick_peaks(trace: &[f32], min_height: f64, min_distance: u32, min_prominence: f64) -> Result<Vec<u32>, JsError> {
    let params = PeakParams {
        min_height,
        min_distance: min_distance as usize,
        min_prominence,
    };
    params.validate().map_err(js_err)?;
    Ok(find_peaks(trace, &params).into_iter().map(|i| i as u32).collect())
}

/// `[tp, fp, fn, precision, recall, f1]` of `predicted` against `truth`.
#[wasm_bindgen]
pub fn score_peaks(predicted: &[u32], truth: &[u32], threshold: u32) -> Vec<f64> {
    let p: Vec<usize> = predicted.iter().map(|&i| i as usize).collect();
    let g: Vec<usize> = truth.iter().map(|&i| i as usize).collect();
    let r = match_peaks(&p, &g, threshold as usize);
    vec![
        r.true_positives() as f64,
        r.false_positives.len() as f64,
        r.false_negatives.len() as f64,
        r.precision,
        r.recall,
        r.f1,
    ]
}

/// The subset of `predicted` matched one-to-one to `truth`.
#[wasm_bindgen]
pub fn matched_peaks(predicted: &[u32], truth: &[u32], threshold: u32) -> Vec<u32> {
    let p: Vec<usize> = predicted.iter().map(|&i| i as usize).collect();
    let g: Vec<usize> = truth.iter().map(|&i| i as usize).collect();
    let mut out: Vec<u32> = match_peaks(&p, &g, threshold as usize)
        .matches
        .iter()
        .map(|m| m.pred_index as u32)
        .collect();
    out.sort_unstable();
    out
}

/// Focal loss of a positive sample at `n` probabilities evenly spaced
/// over `(0, 1)`.
#[wasm_bindgen]
pub fn focal_curve(gamma: f64, n: u32) -> Vec<f64> {
    (1..=n)
        .map(|i| focal_term(i as f64 / (n + 1) as f64, 1, gamma))
        .collect()
}

/// Label position uncertainty in metres for `n` velocities from 0 to
/// `v_max` at a sensor `offset` metres behind the first measuring point.
#[wasm_bindgen]
pub fn uncertainty_curve(offset: f64, v_max: f64, n: u32) -> Vec<f64> {
    let budget = UncertaintyBudget::default();
    (0..n)
        .map(|i| label_uncertainty(v_max * i as f64 / (n.max(2) - 1) as f64, offset, &budget))
        .collect()
}

/// Minimum peak spacing in samples for a wheel distance and top speed.
#[wasm_bindgen]
pub fn min_peak_distance(min_wheel_distance: f64, v_max: f64, sample_rate: f64) -> u32 {
    min_distance_rule(min_wheel_distance, v_max, sample_rate) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passage_views_agree() {
        let p = DemoPassage::new(30.0, 4, 0.05, 1).unwrap();
        assert_eq!(p.crossings().len(), 4);
        assert_eq!(p.signal().len(), p.n_samples());
        assert_eq!(p.channel(0).len(), p.n_samples() * p.n_scales());
        assert!(p.channel(6).is_empty());
        assert_eq!(p.n_channels(), 6);
        assert!(p.channel_name(0).starts_with("cgau1"));
    }

    #[test]
    fn clean_trace_recovers_every_axle() {
        let p = DemoPassage::new(25.0, 6, 0.05, 3).unwrap();
        let trace = p.probability_trace(0, 0, 0.0, 9);
        let peaks = pick_peaks(&trace, 0.25, 20, 0.15).unwrap();
        let s = score_peaks(&peaks, &p.crossings(), 20);
        assert_eq!(s[5], 1.0);
        assert_eq!(peaks, p.crossings());
        assert_eq!(matched_peaks(&peaks, &p.crossings(), 20), peaks);
        assert!(matched_peaks(&[0], &[100], 20).is_empty());
    }

    #[test]
    fn curves() {
        let f0 = focal_curve(0.0, 9);
        assert!((f0[4] - 2f64.ln()).abs() < 1e-12);
        assert!(focal_curve(2.5, 9).iter().zip(&f0).all(|(a, b)| a <= b));
        let u = uncertainty_curve(14.4, 60.0, 61);
        assert_eq!(u[0], 14.4 * 0.2 / 14.4);
        assert!(u.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(min_peak_distance(2.0, 61.1, 600.0), 20);
    }
}
