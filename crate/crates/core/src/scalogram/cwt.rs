use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::wavelet::{half_support, sampled_wavelet, WaveletFamily};
use crate::error::{Error, Result};

/// Complex wavelet coefficients, `n_scales x n_samples`.
///
/// Row `i` holds `c(b) = sum_k x[b + k] conj(psi(k / a)) / sqrt(a)` for
/// scale `a = scales[i]`, with the signal zero-extended at both ends. The
/// sum is evaluated as one zero-padded FFT product per scale.
pub fn cwt_complex(signal: &[f64], family: &WaveletFamily, scales: &[f64]) -> Result<Array2<Complex64>> {
    let n = signal.len();
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("signal contains non-finite samples".into()));
    }
    if let Some(a) = scales.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidInput(format!("scale {a} is not positive")));
    }
    family.validate()?;
    let mut out = Array2::<Complex64>::zeros((scales.len(), n));
    if n == 0 || scales.is_empty() {
        return Ok(out);
    }
    for &a in scales {
        let support = 2 * half_support(a) + 1;
        if support > 10 * n {
            return Err(Error::ScaleTooLarge { scale: a, support, len: n });
        }
    }

    let max_half = scales.iter().map(|&a| half_support(a)).max().unwrap_or(0);
    let nfft = (n + 2 * max_half + 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(nfft);
    let inverse = planner.plan_fft_inverse(nfft);

    let mut spectrum: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    spectrum.resize(nfft, Complex64::new(0.0, 0.0));
    forward.process(&mut spectrum);

    let mut kernel = vec![Complex64::new(0.0, 0.0); nfft];
    let scale_back = 1.0 / nfft as f64;
    for (row, &a) in scales.iter().enumerate() {
        let half = half_support(a);
        let taps = sampled_wavelet(family, a);
        // Filter h[j] = conj(taps[-j]) for j in -half..=half, stored with
        // offset `half` so that output b sits at index b + half.
        kernel.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (m, slot) in kernel.iter_mut().take(2 * half + 1).enumerate() {
            *slot = taps[2 * half - m].conj();
        }
        forward.process(&mut kernel);
        for (k, s) in kernel.iter_mut().zip(&spectrum) {
            *k *= s;
        }
        inverse.process(&mut kernel);
        for (b, v) in out.row_mut(row).iter_mut().enumerate() {
            *v = kernel[b + half] * scale_back;
        }
    }
    Ok(out)
}

/// Real coefficient map: modulus for complex families, the signed real
/// part for real ones.
pub fn cwt(signal: &[f64], family: &WaveletFamily, scales: &[f64]) -> Result<Array2<f64>> {
    let c = cwt_complex(signal, family, scales)?;
    Ok(if family.is_complex() {
        c.mapv(|z| z.norm())
    } else {
        c.mapv(|z| z.re)
    })
}
