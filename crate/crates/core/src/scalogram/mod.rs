//! Six-channel continuous-wavelet scalograms.
//!
//! Each detector input stacks six independently min-max normalized
//! coefficient maps over 16 linearly spaced scales. Channel order is fixed:
//!
//! | channel | wavelet | scales   |
//! |---------|---------|----------|
//! | 0       | cgau1   | 1 - 8    |
//! | 1       | cgau1   | 8 - 50   |
//! | 2       | gaus1   | 0.6 - 6.5|
//! | 3       | gaus1   | 6.5 - 35 |
//! | 4       | fbsp    | 1.5 - 10 |
//! | 5       | fbsp    | 10 - 40  |

mod cwt;
mod wavelet;

use std::fs;
use std::path::Path;

use ndarray::{s, Array2, Array3, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{LabelSet, PassageRecord};

pub use cwt::{cwt, cwt_complex};
pub use wavelet::{half_support, sampled_wavelet, WaveletFamily};

/// Samples kept before the first crossing.
pub const WINDOW_BEFORE: usize = 150;
/// Samples kept after the last crossing.
pub const WINDOW_AFTER: usize = 500;
pub const MIN_WINDOW: usize = 16;
pub const N_SCALES: usize = 16;
pub const N_TRANSFORMS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveletSpec {
    pub family: WaveletFamily,
    pub scale_min: f64,
    pub scale_max: f64,
    pub n_scales: usize,
}

impl WaveletSpec {
    pub const fn new(family: WaveletFamily, scale_min: f64, scale_max: f64) -> Self {
        Self {
            family,
            scale_min,
            scale_max,
            n_scales: N_SCALES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale_min > 0.0 && self.scale_min < self.scale_max && self.scale_max.is_finite()) {
            return Err(Error::Config(format!(
                "scale band must satisfy 0 < min < max, got {}..{}",
                self.scale_min, self.scale_max
            )));
        }
        if self.n_scales < 2 {
            return Err(Error::Config(format!("need at least 2 scales, got {}", self.n_scales)));
        }
        self.family.validate()
    }
}

/// The six transform settings in channel order.
pub fn default_specs() -> Vec<WaveletSpec> {
    use WaveletFamily::*;
    let fbsp = WaveletFamily::default_fbsp();
    vec![
        WaveletSpec::new(ComplexGaussianDerivative1, 1.0, 8.0),
        WaveletSpec::new(ComplexGaussianDerivative1, 8.0, 50.0),
        WaveletSpec::new(GaussianDerivative1, 0.6, 6.5),
        WaveletSpec::new(GaussianDerivative1, 6.5, 35.0),
        WaveletSpec::new(fbsp, 1.5, 10.0),
        WaveletSpec::new(fbsp, 10.0, 40.0),
    ]
}

/// Linearly spaced scales from `scale_min` to `scale_max`, both included.
pub fn scale_grid(spec: &WaveletSpec) -> Vec<f64> {
    let n = spec.n_scales;
    let step = (spec.scale_max - spec.scale_min) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                spec.scale_max
            } else {
                spec.scale_min + step * i as f64
            }
        })
        .collect()
}

/// Min-max normalization to [0, 1]; a constant map becomes all zeros.
pub fn normalize(m: &Array2<f64>) -> Array2<f64> {
    let (lo, hi) = m
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return Array2::zeros(m.dim());
    }
    m.mapv(|v| (v - lo) / range)
}

/// Detector input: `n_s x n_f x n_t`, time-major, values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Scalogram {
    pub data: Array3<f32>,
    /// Offset of the first row within the source recording.
    pub window_start: usize,
}

impl Scalogram {
    pub fn n_samples(&self) -> usize {
        self.data.dim().0
    }
    pub fn n_scales(&self) -> usize {
        self.data.dim().1
    }
    pub fn n_transforms(&self) -> usize {
        self.data.dim().2
    }

    /// Little-endian cache file: `n_s, n_f, n_t, window_start` as `u32`,
    /// then `n_s * n_f * n_t` `f32` values in time-major order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let (ns, nf, nt) = self.data.dim();
        let mut out = Vec::with_capacity(16 + 4 * self.data.len());
        for v in [ns, nf, nt, self.window_start] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for v in self.data.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        if bytes.len() < 16 {
            return Err(Error::format(path, "truncated header"));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap()) as usize;
        let (ns, nf, nt, start) = (word(0), word(1), word(2), word(3));
        let expected = 16 + 4 * ns * nf * nt;
        if bytes.len() != expected {
            return Err(Error::format(
                path,
                format!("{} bytes, header implies {expected}", bytes.len()),
            ));
        }
        let values: Vec<f32> = bytes[16..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let data = Array3::from_shape_vec((ns, nf, nt), values).map_err(|e| Error::format(path, e.to_string()))?;
        Ok(Self {
            data,
            window_start: start,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, &self.to_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

/// Scalogram of an arbitrary signal segment.
pub fn scalogram_of(signal: ArrayView1<'_, f64>, specs: &[WaveletSpec], window_start: usize) -> Result<Scalogram> {
    let n = signal.len();
    if n < MIN_WINDOW {
        return Err(Error::WindowTooShort { len: n, min: MIN_WINDOW });
    }
    let n_f = specs.first().map_or(N_SCALES, |s| s.n_scales);
    if specs.iter().any(|s| s.n_scales != n_f) {
        return Err(Error::Config("all wavelet settings must use the same number of scales".into()));
    }
    let samples = signal.to_vec();
    let mut data = Array3::<f32>::zeros((n, n_f, specs.len()));
    for (ch, spec) in specs.iter().enumerate() {
        spec.validate()?;
        let coeffs = normalize(&cwt(&samples, &spec.family, &scale_grid(spec))?);
        // coeffs is scale-major; the tensor is time-major
        for ((scale, t), &v) in coeffs.indexed_iter() {
            data[[t, scale, ch]] = v as f32;
        }
    }
    Ok(Scalogram { data, window_start })
}

/// Inclusive window `[first - 150, last + 500]` clamped to `n_samples`,
/// returned as `(start, len)`.
pub fn crossing_window(crossings: &[usize], n_samples: usize) -> Option<(usize, usize)> {
    let first = *crossings.iter().min()?;
    let last = *crossings.iter().max()?;
    let start = first.saturating_sub(WINDOW_BEFORE);
    let end = (last + WINDOW_AFTER).min(n_samples.saturating_sub(1));
    Some((start, end + 1 - start))
}

/// Window one sensor of a labeled passage and transform it.
/// Returns the scalogram and the matching slice of the binary targets.
pub fn transform_passage(
    passage: &PassageRecord,
    labels: &LabelSet,
    sensor: usize,
    specs: &[WaveletSpec],
) -> Result<(Scalogram, Vec<u8>)> {
    if sensor >= passage.n_sensors() || sensor >= labels.n_sensors() {
        return Err(Error::InvalidInput(format!(
            "sensor {sensor} out of range for passage {}",
            passage.id
        )));
    }
    let crossings = labels.sensor_crossings(sensor);
    let (start, len) = crossing_window(&crossings, passage.n_samples()).ok_or_else(|| {
        Error::InvalidInput(format!("passage {} has no axles at sensor {sensor}", passage.id))
    })?;
    if len < MIN_WINDOW {
        return Err(Error::WindowTooShort { len, min: MIN_WINDOW });
    }
    let signal = passage.accel.slice(s![start..start + len, sensor]);
    let scalogram = scalogram_of(signal, specs, start)?;
    let targets = labels.targets.slice(s![start..start + len, sensor]).to_vec();
    Ok((scalogram, targets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    #[test]
    fn grid_examples() {
        let g = scale_grid(&WaveletSpec::new(WaveletFamily::GaussianDerivative1, 1.0, 8.0));
        assert_eq!(g.len(), 16);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[15], 8.0);
        assert!((g[1] - g[0] - 7.0 / 15.0).abs() < 1e-12);
        let spec = WaveletSpec {
            n_scales: 2,
            ..WaveletSpec::new(WaveletFamily::GaussianDerivative1, 3.0, 11.0)
        };
        assert_eq!(scale_grid(&spec), vec![3.0, 11.0]);
        let g = scale_grid(&default_specs()[2]);
        assert_eq!((g[0], g[15], g.len()), (0.6, 6.5, 16));
    }

    #[test]
    fn spec_validation() {
        for s in default_specs() {
            s.validate().unwrap();
        }
        assert!(WaveletSpec::new(WaveletFamily::GaussianDerivative1, 2.0, 1.0).validate().is_err());
        assert!(WaveletSpec::new(WaveletFamily::GaussianDerivative1, 0.0, 1.0).validate().is_err());
    }

    #[test]
    fn normalize_examples() {
        let m = array![[0.0, 5.0], [10.0, 5.0]];
        assert_eq!(normalize(&m), array![[0.0, 0.5], [1.0, 0.5]]);
        assert_eq!(normalize(&Array2::from_elem((3, 3), 2.5)), Array2::<f64>::zeros((3, 3)));
        let c = array![[0.0, 0.25], [1.0, 0.75]];
        assert_eq!(normalize(&c), c);
    }

    #[test]
    fn window_arithmetic() {
        assert_eq!(crossing_window(&[1000], 36_000), Some((850, 651)));
        // exact fit: first axle at 150, last at L - 501
        let l = 2000;
        assert_eq!(crossing_window(&[150, l - 501], l), Some((0, l)));
        assert_eq!(crossing_window(&[], 100), None);
        // clamped at both ends
        assert_eq!(crossing_window(&[10, 20], 100), Some((0, 100)));
    }

    #[test]
    fn cache_round_trip() {
        let mut data = Array3::<f32>::zeros((20, 16, 6));
        data[[3, 4, 5]] = 0.75;
        let s = Scalogram { data, window_start: 42 };
        let back = Scalogram::from_bytes(&s.to_bytes(), Path::new("x")).unwrap();
        assert_eq!(back, s);
        assert!(Scalogram::from_bytes(&s.to_bytes()[..100], Path::new("x")).is_err());
    }

    #[test]
    fn short_window_rejected() {
        let sig = Array1::<f64>::zeros(10);
        assert!(matches!(
            scalogram_of(sig.view(), &default_specs(), 0),
            Err(Error::WindowTooShort { .. })
        ));
    }
}
