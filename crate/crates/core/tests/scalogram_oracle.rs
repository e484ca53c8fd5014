mod oracles;

use axledet_core::scalogram::{
    crossing_window, cwt, cwt_complex, default_specs, scale_grid, scalogram_of, transform_passage, WaveletFamily,
    WaveletSpec,
};
use axledet_core::synth::{simulate_passage, SyntheticScenario};
use axledet_core::Error;
use ndarray::{Array1, Array2};
use oracles::{direct_cwt, linspace, relative_frobenius, table_settings, Mother};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_family(m: Mother) -> WaveletFamily {
    match m {
        Mother::Cgau1 => WaveletFamily::ComplexGaussianDerivative1,
        Mother::Gaus1 => WaveletFamily::GaussianDerivative1,
        Mother::Fbsp { m, fb, fc } => WaveletFamily::FrequencyBSpline {
            order: m,
            bandwidth: fb,
            center: fc,
        },
    }
}

fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn settings_match_the_channel_table() {
    let specs = default_specs();
    let table = table_settings();
    assert_eq!(specs.len(), table.len());
    for (spec, (m, lo, hi)) in specs.iter().zip(table) {
        assert_eq!(spec.family, to_family(m));
        assert_eq!((spec.scale_min, spec.scale_max, spec.n_scales), (lo, hi, 16));
    }
}

#[test]
fn fft_transform_matches_direct_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for (mother, lo, hi) in table_settings() {
        let scales = linspace(lo, hi, 16);
        let family = to_family(mother);
        for _ in 0..20 {
            let x = random_signal(&mut rng, 1024);
            let fast = cwt_complex(&x, &family, &scales).unwrap();
            let slow = direct_cwt(&x, mother, &scales);
            let err = relative_frobenius(fast.iter().map(|c| (c.re, c.im)), slow.iter().flatten().copied());
            worst = worst.max(err);
            assert!(err < 1e-6, "{family}: relative error {err:e}");
        }
    }
    assert!(worst < 1e-6);
}

#[test]
fn real_map_is_modulus_or_signed_real_part() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_signal(&mut rng, 300);
    for (mother, lo, hi) in table_settings() {
        let scales = linspace(lo, hi, 16);
        let real = cwt(&x, &to_family(mother), &scales).unwrap();
        let slow = direct_cwt(&x, mother, &scales);
        let norm = slow.iter().flatten().map(|c| c.0.abs() + c.1.abs()).fold(0.0, f64::max);
        for (row, want_row) in slow.iter().enumerate() {
            for (b, &(re, im)) in want_row.iter().enumerate() {
                let want = if mother.is_real() { re } else { re.hypot(im) };
                assert!((real[[row, b]] - want).abs() <= 1e-9 * norm);
            }
        }
    }
}

#[test]
fn impulse_response_is_the_conjugated_wavelet() {
    let n = 1024;
    let m = 512;
    let mut x = vec![0.0; n];
    x[m] = 1.0;
    for (mother, lo, hi) in table_settings() {
        let scales = linspace(lo, hi, 16);
        let c = cwt_complex(&x, &to_family(mother), &scales).unwrap();
        for (row, &a) in scales.iter().enumerate() {
            let half = (8.0 * a).floor() as i64;
            for b in 0..n {
                let k = m as i64 - b as i64;
                let want = if k.abs() <= half {
                    let (re, im) = mother.psi(k as f64 / a);
                    (re / a.sqrt(), -im / a.sqrt())
                } else {
                    (0.0, 0.0)
                };
                let got = c[[row, b]];
                assert!(
                    (got.re - want.0).abs() < 1e-9 && (got.im - want.1).abs() < 1e-9,
                    "scale {a}, b {b}: {got} vs {want:?}"
                );
            }
        }
    }
}

#[test]
fn constant_signal_vanishes_in_the_interior_for_the_real_wavelet() {
    let level = 3.7;
    let x = vec![level; 1024];
    for (lo, hi) in [(0.6, 6.5), (6.5, 35.0)] {
        let scales = linspace(lo, hi, 16);
        let c = cwt(&x, &WaveletFamily::GaussianDerivative1, &scales).unwrap();
        for (row, &a) in scales.iter().enumerate() {
            let half = (8.0 * a).floor() as usize;
            for b in half..x.len() - half {
                assert!(c[[row, b]].abs() <= 1e-6 * level, "scale {a} sample {b}: {}", c[[row, b]]);
            }
        }
    }
}

#[test]
fn zero_signal_gives_zero_map() {
    for spec in default_specs() {
        let c = cwt(&[0.0; 200], &spec.family, &scale_grid(&spec)).unwrap();
        assert!(c.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn oversized_scale_is_rejected() {
    let err = cwt(&[1.0; 10], &WaveletFamily::GaussianDerivative1, &[20.0]).unwrap_err();
    assert!(matches!(err, Error::ScaleTooLarge { .. }), "{err}");
}

#[test]
fn scale_grid_examples() {
    let g = scale_grid(&WaveletSpec::new(WaveletFamily::GaussianDerivative1, 0.6, 6.5));
    assert_eq!(g.len(), 16);
    assert_eq!(g[0], 0.6);
    assert_eq!(g[15], 6.5);
    let step = 7.0 / 15.0;
    let g = scale_grid(&WaveletSpec::new(WaveletFamily::ComplexGaussianDerivative1, 1.0, 8.0));
    for (i, w) in g.windows(2).enumerate() {
        assert!((w[1] - w[0] - step).abs() < 1e-12, "step {i}");
    }
    let two = WaveletSpec {
        n_scales: 2,
        ..WaveletSpec::new(WaveletFamily::GaussianDerivative1, 2.0, 9.0)
    };
    assert_eq!(scale_grid(&two), vec![2.0, 9.0]);
}

#[test]
fn single_axle_window_arithmetic() {
    assert_eq!(crossing_window(&[1000], 5000), Some((850, 651)));
    // first axle at 150, last 501 before the end: the whole recording
    assert_eq!(crossing_window(&[150, 1499], 2000), Some((0, 2000)));
}

#[test]
fn passage_tensor_shape_and_targets() {
    let scenario = SyntheticScenario::default();
    let (record, labels) = simulate_passage(&scenario).unwrap();
    let (scalogram, targets) = transform_passage(&record, &labels, 1, &default_specs()).unwrap();
    let crossings = labels.sensor_crossings(1);
    let (start, len) = crossing_window(&crossings, record.n_samples()).unwrap();
    assert_eq!(scalogram.data.dim(), (len, 16, 6));
    assert_eq!(scalogram.window_start, start);
    assert_eq!(targets.len(), len);
    let ones: Vec<usize> = targets.iter().enumerate().filter(|(_, &y)| y == 1).map(|(i, _)| i + start).collect();
    assert_eq!(ones, crossings);
    for ch in 0..6 {
        let slab = scalogram.data.index_axis(ndarray::Axis(2), ch);
        let lo = slab.iter().cloned().fold(f32::INFINITY, f32::min);
        let hi = slab.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
        assert_eq!((lo, hi), (0.0, 1.0), "channel {ch}");
    }
}

#[test]
fn short_window_is_rejected() {
    let x = Array1::<f64>::zeros(15);
    assert!(matches!(
        scalogram_of(x.view(), &default_specs(), 0),
        Err(Error::WindowTooShort { len: 15, .. })
    ));
}

fn max_abs(m: &Array2<f64>) -> f64 {
    m.iter().fold(0.0, |a, &v| a.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn amplitude_covariance(seed in any::<u64>(), c in 0.01f64..100.0, setting in 0usize..6) {
        let spec = default_specs()[setting];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_signal(&mut rng, 400);
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        let scales = scale_grid(&spec);
        let a = cwt(&x, &spec.family, &scales).unwrap();
        let b = cwt(&scaled, &spec.family, &scales).unwrap();
        let tol = 1e-12 * c * max_abs(&a);
        for (p, q) in a.iter().zip(b.iter()) {
            prop_assert!((p * c - q).abs() <= tol);
        }
        let sa = scalogram_of(Array1::from(x).view(), &[spec], 0).unwrap();
        let sb = scalogram_of(Array1::from(scaled).view(), &[spec], 0).unwrap();
        for (p, q) in sa.data.iter().zip(sb.data.iter()) {
            prop_assert!((p - q).abs() <= 1e-5);
        }
    }

    #[test]
    fn time_covariance(seed in any::<u64>(), shift in 1usize..64, setting in 0usize..6) {
        let spec = default_specs()[setting];
        let scales = scale_grid(&spec);
        let half = (8.0 * spec.scale_max).floor() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 * half + 300;
        let x = random_signal(&mut rng, n);
        let mut shifted = vec![0.0; shift];
        shifted.extend_from_slice(&x);
        let a = cwt(&x, &spec.family, &scales).unwrap();
        let b = cwt(&shifted, &spec.family, &scales).unwrap();
        let tol = 1e-9 * max_abs(&a);
        for row in 0..scales.len() {
            for t in half..n - half {
                prop_assert!((a[[row, t]] - b[[row, t + shift]]).abs() <= tol);
            }
        }
    }
}
