//! Slow, obviously-correct reference implementations used as test oracles.
//!
//! Nothing here calls into the crate under test. Complex numbers are plain
//! `(re, im)` pairs so the module can be shared by test targets that do not
//! depend on a complex-number crate.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::RngExt;
use rand_chacha::ChaCha8Rng;

pub type C = (f64, f64);

fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cexp_i(phase: f64) -> C {
    (phase.cos(), phase.sin())
}

/// Mother wavelets, written from their textbook definitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mother {
    /// `d/dt [e^{-it} e^{-t^2}]`, unit energy.
    Cgau1,
    /// `d/dt e^{-t^2}`, unit energy.
    Gaus1,
    /// `sqrt(fb) sinc(fb t / m)^m e^{2 pi i fc t}`.
    Fbsp { m: u32, fb: f64, fc: f64 },
}

impl Mother {
    pub fn psi(self, t: f64) -> C {
        match self {
            Mother::Cgau1 => {
                // derivative of e^{-it - t^2} is (-i - 2t) e^{-it - t^2};
                // its energy integral is 2 sqrt(pi/2)
                let energy = 2.0 * (PI / 2.0).sqrt();
                let envelope = (-t * t).exp() / energy.sqrt();
                let v = cmul((-2.0 * t, -1.0), cexp_i(-t));
                (v.0 * envelope, v.1 * envelope)
            }
            Mother::Gaus1 => {
                // energy of -2t e^{-t^2} is sqrt(pi/2)
                let energy = (PI / 2.0).sqrt();
                (-2.0 * t * (-t * t).exp() / energy.sqrt(), 0.0)
            }
            Mother::Fbsp { m, fb, fc } => {
                let x = PI * fb * t / m as f64;
                let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
                let a = fb.sqrt() * sinc.powi(m as i32);
                let w = cexp_i(2.0 * PI * fc * t);
                (a * w.0, a * w.1)
            }
        }
    }

    pub fn is_real(self) -> bool {
        self == Mother::Gaus1
    }
}

/// The six transform settings in channel order.
pub fn table_settings() -> Vec<(Mother, f64, f64)> {
    let fbsp = Mother::Fbsp { m: 1, fb: 1.0, fc: 1.5 };
    vec![
        (Mother::Cgau1, 1.0, 8.0),
        (Mother::Cgau1, 8.0, 50.0),
        (Mother::Gaus1, 0.6, 6.5),
        (Mother::Gaus1, 6.5, 35.0),
        (fbsp, 1.5, 10.0),
        (fbsp, 10.0, 40.0),
    ]
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Direct summation of
/// `c(b) = sum_{|k| <= floor(8a)} x[b + k] conj(psi(k / a)) / sqrt(a)`,
/// reading zero outside the signal. One row per scale.
pub fn direct_cwt(x: &[f64], mother: Mother, scales: &[f64]) -> Vec<Vec<C>> {
    let n = x.len() as i64;
    scales
        .iter()
        .map(|&a| {
            let half = (8.0 * a).floor() as i64;
            let taps: Vec<C> = (-half..=half)
                .map(|k| {
                    let (re, im) = mother.psi(k as f64 / a);
                    (re / a.sqrt(), -im / a.sqrt())
                })
                .collect();
            (0..n)
                .map(|b| {
                    let mut acc = (0.0, 0.0);
                    for (j, tap) in taps.iter().enumerate() {
                        let idx = b + j as i64 - half;
                        if (0..n).contains(&idx) {
                            let v = x[idx as usize];
                            acc.0 += v * tap.0;
                            acc.1 += v * tap.1;
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `||a - b||_F / ||b||_F` over flattened complex matrices.
pub fn relative_frobenius(a: impl IntoIterator<Item = C>, b: impl IntoIterator<Item = C>) -> f64 {
    let (mut diff, mut norm) = (0.0, 0.0);
    for (p, q) in a.into_iter().zip(b) {
        diff += (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2);
        norm += q.0 * q.0 + q.1 * q.1;
    }
    if norm == 0.0 {
        diff.sqrt()
    } else {
        (diff / norm).sqrt()
    }
}

/// Flat-topped local maxima: maximal runs of equal values whose neighbours
/// on both sides are strictly lower, reported at the run's left-biased
/// middle. Runs touching an end of the trace never count.
pub fn plateau_peaks(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < x.len() {
        let mut end = start;
        while end + 1 < x.len() && x[end + 1] == x[start] {
            end += 1;
        }
        if start > 0 && end + 1 < x.len() && x[start - 1] < x[start] && x[end + 1] < x[start] {
            out.push((start + end) / 2);
        }
        start = end + 1;
    }
    out
}

/// Height above the higher of the two bases, each base being the minimum
/// of the stretch between the peak and the nearest strictly higher sample
/// (or the trace end) on that side.
pub fn topographic_prominence(x: &[f64], i: usize) -> f64 {
    let h = x[i];
    let left_stop = (0..i).rev().find(|&j| x[j] > h).map_or(0, |j| j + 1);
    let right_stop = (i + 1..x.len()).find(|&j| x[j] > h).unwrap_or(x.len());
    let left = x[left_stop..=i].iter().cloned().fold(f64::INFINITY, f64::min);
    let right = x[i..right_stop].iter().cloned().fold(f64::INFINITY, f64::min);
    h - left.max(right)
}

/// Exhaustive peak selection. Every subset of gated candidates whose
/// members are pairwise at least `min_distance` apart is enumerated, and the
/// one that wins a lexicographic comparison in priority order (height
/// descending, index ascending) is returned in ascending order.
///
/// Candidates farther apart than `min_distance` cannot interact, so the
/// enumeration runs per cluster of mutually reachable candidates.
pub fn brute_force_peaks(x: &[f64], min_height: f64, min_prominence: f64, min_distance: usize) -> Vec<usize> {
    let candidates: Vec<usize> = plateau_peaks(x)
        .into_iter()
        .filter(|&i| x[i] >= min_height && topographic_prominence(x, i) >= min_prominence)
        .collect();
    let mut chosen = Vec::new();
    let mut cluster: Vec<usize> = Vec::new();
    for &c in &candidates {
        if let Some(&last) = cluster.last() {
            if c - last >= min_distance {
                chosen.extend(best_subset(x, &cluster, min_distance));
                cluster.clear();
            }
        }
        cluster.push(c);
    }
    chosen.extend(best_subset(x, &cluster, min_distance));
    chosen.sort_unstable();
    chosen
}

fn best_subset(x: &[f64], cluster: &[usize], min_distance: usize) -> Vec<usize> {
    assert!(cluster.len() <= 22, "cluster of {} candidates is too large to enumerate", cluster.len());
    let mut priority: Vec<usize> = cluster.to_vec();
    priority.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let n = priority.len();
    let mut best: Option<u32> = None;
    for mask in 0u32..(1u32 << n) {
        let members: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).map(|k| priority[k]).collect();
        let feasible = members
            .iter()
            .enumerate()
            .all(|(i, &a)| members[i + 1..].iter().all(|&b| a.abs_diff(b) >= min_distance));
        if !feasible {
            continue;
        }
        // bit k is priority rank k; lexicographic order on ranks is the
        // order of the bit-reversed mask
        let key = mask.reverse_bits();
        if best.map_or(true, |b| key > b.reverse_bits()) {
            best = Some(mask);
        }
    }
    let mask = best.unwrap_or(0);
    (0..n).filter(|&k| mask & (1 << k) != 0).map(|k| priority[k]).collect()
}

/// Binary cross-entropy with the same probability clamp as the loss.
pub fn cross_entropy(p: f64, y: u8) -> f64 {
    let p = p.clamp(1e-7, 1.0 - 1e-7);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Trainable parameter count of the encoder/decoder network, tallied layer
/// by layer: convolutions carry a bias, batch norms a scale and a shift.
pub fn parameter_count(depth: usize, base: usize, in_channels: usize, in_scales: usize, k: usize) -> usize {
    let conv = |ci: usize, co: usize, taps: usize| ci * co * taps + co;
    let cb = |ci: usize, co: usize, taps: usize| 2 * ci + conv(ci, co, taps);
    let res = |c: usize| cb(c, c, 1) + cb(c, c, k) + cb(c, c, 1) + cb(c, c, 1);
    let stage = |ci: usize, co: usize| cb(ci, co, k) + res(co);
    let maps = |level: usize| base << level;

    let mut total = 0;
    let mut cin = in_channels;
    for level in 0..depth {
        total += stage(cin, maps(level));
        cin = maps(level);
    }
    total += stage(cin, maps(depth));
    for level in (0..depth).rev() {
        let c = maps(level);
        total += maps(level + 1) * c * 3 + c;
        total += conv(c * (in_scales >> level), c, 1);
        total += stage(2 * c, c);
    }
    total + conv(maps(0), 1, k)
}

/// Detector-like trace: a handful of bumps over a low floor, quantized so
/// that plateaus and equal heights occur.
pub fn random_trace(rng: &mut ChaCha8Rng) -> Vec<f32> {
    let n = rng.random_range(1..=500usize);
    let floor = rng.random_range(0.0..0.2);
    let mut x = vec![floor; n];
    for _ in 0..rng.random_range(0..=12) {
        let centre = rng.random_range(0.0..n as f64);
        let width = rng.random_range(0.5..12.0);
        let height = rng.random_range(0.05..0.9);
        for (i, v) in x.iter_mut().enumerate() {
            let u = (i as f64 - centre) / width;
            *v += height * (-0.5 * u * u).exp();
        }
    }
    let step = [0.01, 0.02, 0.05][rng.random_range(0..3)];
    x.iter().map(|v| ((v.min(1.0) / step).round() * step) as f32).collect()
}
