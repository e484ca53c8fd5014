use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mother wavelets available to the transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum WaveletFamily {
    /// First derivative of a complex Gaussian, `d/dt (e^{-it} e^{-t^2})`.
    ComplexGaussianDerivative1,
    /// First derivative of a Gaussian.
    GaussianDerivative1,
    /// Frequency B-spline `sqrt(fb) sinc(fb t / m)^m e^{2 pi i fc t}`.
    FrequencyBSpline {
        order: u32,
        bandwidth: f64,
        center: f64,
    },
}

impl WaveletFamily {
    /// Frequency B-spline with order 1, bandwidth 1.0, centre 1.5.
    pub const fn default_fbsp() -> Self {
        WaveletFamily::FrequencyBSpline {
            order: 1,
            bandwidth: 1.0,
            center: 1.5,
        }
    }

    pub fn is_complex(&self) -> bool {
        !matches!(self, WaveletFamily::GaussianDerivative1)
    }

    /// Mother wavelet at `t`, unit L2 norm.
    pub fn psi(&self, t: f64) -> Complex64 {
        match *self {
            WaveletFamily::ComplexGaussianDerivative1 => {
                let norm = 1.0 / (2.0 * (PI / 2.0).sqrt()).sqrt();
                let g = (-t * t).exp() * norm;
                let (s, c) = t.sin_cos();
                Complex64::new((-2.0 * t * c - s) * g, (2.0 * t * s - c) * g)
            }
            WaveletFamily::GaussianDerivative1 => {
                let norm = 1.0 / (PI / 2.0).sqrt().sqrt();
                Complex64::new(-2.0 * t * (-t * t).exp() * norm, 0.0)
            }
            WaveletFamily::FrequencyBSpline {
                order,
                bandwidth,
                center,
            } => {
                let arg = bandwidth * t / order as f64;
                let sinc = if arg == 0.0 { 1.0 } else { (PI * arg).sin() / (PI * arg) };
                let envelope = bandwidth.sqrt() * sinc.powi(order as i32);
                Complex64::from_polar(envelope, 2.0 * PI * center * t)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let WaveletFamily::FrequencyBSpline {
            order,
            bandwidth,
            center,
        } = *self
        {
            if order == 0 || !(bandwidth > 0.0) || !(center > 0.0) {
                return Err(Error::Config(format!(
                    "frequency B-spline needs order >= 1 and positive bandwidth/centre, got {order}/{bandwidth}/{center}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaveletFamily::ComplexGaussianDerivative1 => write!(f, "cgau1"),
            WaveletFamily::GaussianDerivative1 => write!(f, "gaus1"),
            WaveletFamily::FrequencyBSpline {
                order,
                bandwidth,
                center,
            } => write!(f, "fbsp{order}-{bandwidth}-{center}"),
        }
    }
}

/// Half-width in samples of the discretized wavelet at `scale`: the
/// mother wavelet is sampled on `[-8 scale, 8 scale]` at unit step.
pub fn half_support(scale: f64) -> usize {
    (8.0 * scale).floor() as usize
}

/// Sampled, `1/sqrt(scale)`-normalized wavelet: entry `k + K` holds
/// `psi(k / scale) / sqrt(scale)` for `k` in `-K..=K`.
pub fn sampled_wavelet(family: &WaveletFamily, scale: f64) -> Vec<Complex64> {
    let half = half_support(scale) as i64;
    let norm = 1.0 / scale.sqrt();
    (-half..=half)
        .map(|k| family.psi(k as f64 / scale) * norm)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trapezoidal integral of |psi|^2 over a wide interval.
    fn energy(f: &WaveletFamily, half: f64) -> f64 {
        let n = 400_000;
        let h = 2.0 * half / n as f64;
        (0..=n)
            .map(|i| {
                let t = -half + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * f.psi(t).norm_sqr()
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn gaussian_families_have_unit_energy() {
        assert!((energy(&WaveletFamily::GaussianDerivative1, 10.0) - 1.0).abs() < 1e-9);
        assert!((energy(&WaveletFamily::ComplexGaussianDerivative1, 10.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fbsp_energy_is_unit_in_the_limit() {
        // sinc^2 tails decay slowly; the integral converges to 1 as 1/T
        let e = energy(&WaveletFamily::default_fbsp(), 2000.0);
        assert!((e - 1.0).abs() < 1e-3, "{e}");
    }

    #[test]
    fn gaussian_derivative_is_odd() {
        let f = WaveletFamily::GaussianDerivative1;
        for t in [0.1, 0.7, 2.3] {
            assert!((f.psi(t).re + f.psi(-t).re).abs() < 1e-15);
        }
        assert_eq!(f.psi(0.0).re, 0.0);
    }

    #[test]
    fn support_sizes() {
        assert_eq!(half_support(0.6), 4);
        assert_eq!(half_support(1.0), 8);
        assert_eq!(sampled_wavelet(&WaveletFamily::GaussianDerivative1, 50.0).len(), 801);
    }

    #[test]
    fn invalid_fbsp_rejected() {
        let f = WaveletFamily::FrequencyBSpline {
            order: 0,
            bandwidth: 1.0,
            center: 1.5,
        };
        assert!(f.validate().is_err());
    }
}
