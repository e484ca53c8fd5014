//! Synthetic bridge crossings with exact axle ground truth.
//!
//! The bridge is a simply supported beam. Each bending mode is a damped
//! oscillator driven by the moving axle loads sampled through the mode
//! shape `sin(k pi x / span)`. Modes are stepped exactly for a force that
//! is linear between samples (first-order hold), so there is no solver
//! tolerance in the generated signals.
//!
//! On top of the global modal response each sensor sees a near-field term:
//! the local deflection basin of a wheel directly above the sensor,
//! `w = c P exp(-((x - x_s) / l)^2)`, differentiated twice in time. Every
//! part of the response is linear in the axle loads.

use ndarray::Array2;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{
    build_binary_labels, label_uncertainty, LabelSet, PassageRecord, UncertaintyBudget,
};

/// Additive white Gaussian measurement noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLevel {
    /// RMS in m/s².
    Absolute(f64),
    /// RMS as a fraction of the noise-free acceleration RMS of the passage.
    RelativeToSignal(f64),
}

/// Local deflection basin under a wheel, seen only by nearby sensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NearField {
    /// Basin half-width, metres.
    pub length: f64,
    /// Peak local deflection per newton of axle load, m/N.
    pub compliance: f64,
}

impl Default for NearField {
    fn default() -> Self {
        Self {
            length: 0.25,
            compliance: 2e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticScenario {
    pub id: String,
    /// Metres.
    pub span: f64,
    /// Hz, one entry per simulated mode.
    pub modal_frequencies: Vec<f64>,
    /// Damping ratios, one per mode.
    pub modal_damping: Vec<f64>,
    /// kg/m.
    pub mass_per_length: f64,
    /// Distance of each axle behind the leading axle, metres, ascending,
    /// first entry 0.
    pub axle_positions: Vec<f64>,
    /// Newtons, one per axle.
    pub axle_loads: Vec<f64>,
    /// m/s.
    pub velocity: f64,
    /// Accelerometer positions measured from the left support, metres.
    pub sensor_positions: Vec<f64>,
    pub near_field: NearField,
    pub noise: NoiseLevel,
    pub sample_rate: f64,
    pub seed: u64,
    /// Position of wheel-load measuring point G1 relative to the left
    /// support, metres (negative = before the bridge).
    pub wlm_position: f64,
    pub wlm_spacing: f64,
    /// Seconds between recording start and the leading axle reaching G1.
    pub lead_in: f64,
    /// Seconds recorded after the last axle has left the instrumented zone.
    pub tail: f64,
    /// Fixed recording length in seconds; derived from the geometry when
    /// absent.
    pub duration: Option<f64>,
}

impl Default for SyntheticScenario {
    fn default() -> Self {
        let f1 = 6.9;
        Self {
            id: "synthetic".into(),
            span: 16.4,
            modal_frequencies: (1..=3).map(|k| f1 * (k * k) as f64).collect(),
            modal_damping: vec![0.02; 3],
            mass_per_length: 10_000.0,
            axle_positions: vec![0.0, 2.5, 17.5, 20.0],
            axle_loads: vec![100e3; 4],
            velocity: 30.0,
            sensor_positions: vec![4.1, 8.2, 12.3],
            near_field: NearField::default(),
            noise: NoiseLevel::Absolute(0.0),
            sample_rate: 600.0,
            seed: 0,
            wlm_position: -2.0,
            wlm_spacing: crate::ingest::DEFAULT_WLM_SPACING,
            lead_in: 0.5,
            tail: 1.0,
            duration: None,
        }
    }
}

impl SyntheticScenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(format!("scenario {}: {m}", self.id)));
        if !(self.span > 0.0) {
            return bad("span must be positive".into());
        }
        if self.modal_frequencies.len() != self.modal_damping.len() {
            return bad("one damping ratio per mode required".into());
        }
        if self.modal_frequencies.iter().any(|f| !(*f > 0.0)) {
            return bad("modal frequencies must be positive".into());
        }
        if self.modal_damping.iter().any(|z| !(0.0..1.0).contains(z)) {
            return bad("damping ratios must lie in [0, 1)".into());
        }
        if self.axle_positions.is_empty() || self.axle_positions.len() != self.axle_loads.len() {
            return bad("need one load per axle and at least one axle".into());
        }
        if self.axle_positions.windows(2).any(|w| w[0] >= w[1]) {
            return bad("axle positions must be strictly increasing".into());
        }
        if !(self.velocity > 0.0) {
            return bad("velocity must be positive".into());
        }
        if self.sensor_positions.is_empty()
            || self.sensor_positions.iter().any(|&x| !(x > 0.0 && x < self.span))
        {
            return bad("sensor positions must lie strictly inside the span".into());
        }
        if self.sensor_positions.iter().any(|&x| x < self.wlm_position) {
            return bad("sensors must lie downstream of G1".into());
        }
        if !(self.sample_rate > 0.0 && self.mass_per_length > 0.0 && self.near_field.length > 0.0) {
            return bad("sample rate, mass and near-field length must be positive".into());
        }
        Ok(())
    }

    fn start_position(&self) -> f64 {
        self.wlm_position - self.velocity * self.lead_in
    }

    /// Seconds from recording start until the axle `pos` metres behind the
    /// leader reaches coordinate `x`.
    fn crossing_time(&self, pos: f64, x: f64) -> f64 {
        (x - self.start_position() + pos) / self.velocity
    }

    fn crossing_index(&self, pos: f64, x: f64) -> i64 {
        (self.crossing_time(pos, x) * self.sample_rate).round() as i64
    }

    fn n_samples(&self) -> Result<usize> {
        let last = *self.axle_positions.last().expect("validated");
        let far = self
            .span
            .max(self.wlm_position + self.wlm_spacing)
            .max(self.sensor_positions.iter().copied().fold(0.0, f64::max));
        let t_clear = self.crossing_time(last, far);
        match self.duration {
            None => Ok(((t_clear + self.tail) * self.sample_rate).ceil() as usize + 1),
            Some(d) => {
                let n = (d * self.sample_rate).floor() as usize;
                if d < t_clear {
                    return Err(Error::DurationTooShort(format!(
                        "scenario {}: last axle clears the bridge after {t_clear:.3} s, recording lasts {d:.3} s",
                        self.id
                    )));
                }
                Ok(n)
            }
        }
    }
}

/// 4x4 matrix exponential by scaling and squaring of a Taylor series.
fn expm4(a: [[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let norm = a
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = 0.5f64.powi(squarings as i32);
    let mut x = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            x[i][j] = a[i][j] * scale;
        }
    }
    let mul = |p: &[[f64; 4]; 4], q: &[[f64; 4]; 4]| {
        let mut r = [[0.0; 4]; 4];
        for i in 0..4 {
            for k in 0..4 {
                for j in 0..4 {
                    r[i][j] += p[i][k] * q[k][j];
                }
            }
        }
        r
    };
    let mut result = [[0.0; 4]; 4];
    let mut term = [[0.0; 4]; 4];
    for i in 0..4 {
        result[i][i] = 1.0;
        term[i][i] = 1.0;
    }
    for n in 1..=24 {
        term = mul(&term, &x);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= n as f64;
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mul(&result, &result);
    }
    result
}

/// Exact one-step propagator of `q'' + 2 zeta w q' + w^2 q = F / m` for a
/// force that varies linearly over the step.
struct ModeStepper {
    phi: [[f64; 2]; 2],
    gamma0: [f64; 2],
    gamma1: [f64; 2],
    omega: f64,
    zeta: f64,
    inv_mass: f64,
    dt: f64,
}

impl ModeStepper {
    fn new(freq: f64, zeta: f64, modal_mass: f64, dt: f64) -> Self {
        let omega = 2.0 * std::f64::consts::PI * freq;
        let inv_mass = 1.0 / modal_mass;
        let aug = [
            [0.0, 1.0, 0.0, 0.0],
            [-omega * omega, -2.0 * zeta * omega, inv_mass, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0],
        ];
        let mut scaled = aug;
        for row in scaled.iter_mut() {
            for v in row.iter_mut() {
                *v *= dt;
            }
        }
        let e = expm4(scaled);
        Self {
            phi: [[e[0][0], e[0][1]], [e[1][0], e[1][1]]],
            gamma0: [e[0][2], e[1][2]],
            gamma1: [e[0][3], e[1][3]],
            omega,
            zeta,
            inv_mass,
            dt,
        }
    }

    /// Modal accelerations at every sample for the force history `force`.
    fn run(&self, force: &[f64]) -> Vec<f64> {
        let mut q = [0.0f64; 2];
        let mut out = Vec::with_capacity(force.len());
        for n in 0..force.len() {
            let accel = force[n] * self.inv_mass
                - 2.0 * self.zeta * self.omega * q[1]
                - self.omega * self.omega * q[0];
            out.push(accel);
            if n + 1 < force.len() {
                let f0 = force[n];
                let slope = (force[n + 1] - f0) / self.dt;
                let next = [
                    self.phi[0][0] * q[0] + self.phi[0][1] * q[1] + self.gamma0[0] * f0 + self.gamma1[0] * slope,
                    self.phi[1][0] * q[0] + self.phi[1][1] * q[1] + self.gamma0[1] * f0 + self.gamma1[1] * slope,
                ];
                q = next;
            }
        }
        out
    }
}

/// Simulate one crossing. Returns the recording and its exact labels.
pub fn simulate_passage(scenario: &SyntheticScenario) -> Result<(PassageRecord, LabelSet)> {
    scenario.validate()?;
    let n = scenario.n_samples()?;
    let fs = scenario.sample_rate;
    let dt = 1.0 / fs;
    let v = scenario.velocity;
    let x0 = scenario.start_position();
    let span = scenario.span;
    let n_sensors = scenario.sensor_positions.len();

    let mut accel = Array2::<f64>::zeros((n, n_sensors));

    // Global modal response.
    let modal_mass = scenario.mass_per_length * span / 2.0;
    for (k, (&freq, &zeta)) in scenario
        .modal_frequencies
        .iter()
        .zip(&scenario.modal_damping)
        .enumerate()
    {
        let wave = (k + 1) as f64 * std::f64::consts::PI / span;
        let force: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                scenario
                    .axle_positions
                    .iter()
                    .zip(&scenario.axle_loads)
                    .map(|(&pos, &load)| {
                        let x = x0 + v * t - pos;
                        if (0.0..=span).contains(&x) {
                            load * (wave * x).sin()
                        } else {
                            0.0
                        }
                    })
                    .sum()
            })
            .collect();
        let q_acc = ModeStepper::new(freq, zeta, modal_mass, dt).run(&force);
        for (s, &xs) in scenario.sensor_positions.iter().enumerate() {
            let shape = (wave * xs).sin();
            for (i, a) in q_acc.iter().enumerate() {
                accel[[i, s]] += shape * a;
            }
        }
    }

    // Near-field basin under each wheel.
    let nf = scenario.near_field;
    if nf.compliance != 0.0 {
        let l = nf.length;
        let gain = nf.compliance * v * v / (l * l);
        for (s, &xs) in scenario.sensor_positions.iter().enumerate() {
            for (&pos, &load) in scenario.axle_positions.iter().zip(&scenario.axle_loads) {
                let t_c = scenario.crossing_time(pos, xs);
                // exp(-u^2) is below 1e-16 beyond |u| = 6
                let reach = 6.0 * l / v;
                let lo = ((t_c - reach) * fs).floor().max(0.0) as usize;
                let hi = (((t_c + reach) * fs).ceil() as usize).min(n.saturating_sub(1));
                for i in lo..=hi {
                    let u = (x0 + v * i as f64 * dt - pos - xs) / l;
                    accel[[i, s]] += gain * load * (4.0 * u * u - 2.0) * (-u * u).exp();
                }
            }
        }
    }

    let noise_rms = match scenario.noise {
        NoiseLevel::Absolute(r) => r,
        NoiseLevel::RelativeToSignal(frac) => {
            let rms = (accel.iter().map(|a| a * a).sum::<f64>() / accel.len().max(1) as f64).sqrt();
            frac * rms
        }
    };
    if noise_rms > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        let normal = Normal::new(0.0, noise_rms)
            .map_err(|e| Error::InvalidInput(format!("noise level: {e}")))?;
        for a in accel.iter_mut() {
            *a += normal.sample(&mut rng);
        }
    }

    // Wheel-load pulses: 5-sample triangles at G1 and G2.
    let mut wheel_load = Array2::<f64>::zeros((n, 2));
    let points = [scenario.wlm_position, scenario.wlm_position + scenario.wlm_spacing];
    for (ch, &x) in points.iter().enumerate() {
        for (&pos, &load) in scenario.axle_positions.iter().zip(&scenario.axle_loads) {
            let c = scenario.crossing_index(pos, x);
            for d in -2i64..=2 {
                let i = c + d;
                if (0..n as i64).contains(&i) {
                    wheel_load[[i as usize, ch]] += load * (1.0 - d.abs() as f64 / 3.0);
                }
            }
        }
    }

    let sensor_offsets: Vec<f64> = scenario
        .sensor_positions
        .iter()
        .map(|&xs| xs - scenario.wlm_position)
        .collect();
    let n_a = scenario.axle_positions.len();
    let mut crossing = Array2::<usize>::zeros((n_a, n_sensors));
    for (a, &pos) in scenario.axle_positions.iter().enumerate() {
        for (s, &xs) in scenario.sensor_positions.iter().enumerate() {
            let idx = scenario.crossing_index(pos, xs);
            if idx < 0 || idx >= n as i64 {
                return Err(Error::DurationTooShort(format!(
                    "scenario {}: axle {a} reaches sensor {s} outside the recording",
                    scenario.id
                )));
            }
            crossing[[a, s]] = idx as usize;
        }
    }
    let budget = UncertaintyBudget {
        dt,
        wlm_spacing: scenario.wlm_spacing,
        wlm_spacing_uncertainty: crate::ingest::DEFAULT_WLM_SPACING_UNCERTAINTY,
    };
    let uncertainty = Array2::from_shape_fn((n_a, n_sensors), |(_, s)| {
        label_uncertainty(v, sensor_offsets[s], &budget)
    });
    let targets = build_binary_labels(&crossing, n)?;

    let record = PassageRecord {
        id: scenario.id.clone(),
        sample_rate: fs,
        accel,
        wheel_load,
        sensor_offsets,
        wlm_spacing: scenario.wlm_spacing,
        wlm_spacing_uncertainty: crate::ingest::DEFAULT_WLM_SPACING_UNCERTAINTY,
    };
    let labels = LabelSet {
        axle_velocities: vec![v; n_a],
        crossing_indices: crossing,
        uncertainty,
        targets,
    };
    Ok((record, labels))
}

/// Randomized dataset of train crossings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthDatasetConfig {
    pub n_passages: usize,
    pub min_axles: usize,
    pub max_axles: usize,
    pub min_velocity: f64,
    pub max_velocity: f64,
    /// Noise RMS as a fraction of the signal RMS.
    pub noise_fraction: f64,
    /// Axle spacing within a bogie, metres.
    pub bogie_wheelbase: (f64, f64),
    /// Gap between consecutive bogies, metres.
    pub bogie_gap: (f64, f64),
    /// Axle load range, newtons.
    pub axle_load: (f64, f64),
    pub seed: u64,
    /// Template for everything not randomized.
    pub base: SyntheticScenario,
}

impl Default for SynthDatasetConfig {
    fn default() -> Self {
        Self {
            n_passages: 40,
            min_axles: 2,
            max_axles: 16,
            min_velocity: 10.0,
            max_velocity: 57.0,
            noise_fraction: 0.05,
            bogie_wheelbase: (2.2, 3.0),
            bogie_gap: (4.0, 12.0),
            axle_load: (80e3, 110e3),
            seed: 7,
            base: SyntheticScenario::default(),
        }
    }
}

impl SynthDatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_passages == 0 {
            return Err(Error::Config("empty dataset requested".into()));
        }
        if self.min_axles == 0 || self.min_axles > self.max_axles {
            return Err(Error::Config("axle count range is empty".into()));
        }
        if !(self.min_velocity > 0.0 && self.min_velocity <= self.max_velocity) {
            return Err(Error::Config("velocity range is empty".into()));
        }
        Ok(())
    }

    /// Scenario for passage `index`; depends only on the seed and index.
    pub fn scenario(&self, index: usize) -> SyntheticScenario {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let n_axles = rng.random_range(self.min_axles..=self.max_axles);
        let mut positions = vec![0.0];
        for a in 1..n_axles {
            let gap = if a % 2 == 1 {
                rng.random_range(self.bogie_wheelbase.0..=self.bogie_wheelbase.1)
            } else {
                rng.random_range(self.bogie_gap.0..=self.bogie_gap.1)
            };
            positions.push(positions[a - 1] + gap);
        }
        let loads = (0..n_axles)
            .map(|_| rng.random_range(self.axle_load.0..=self.axle_load.1))
            .collect();
        let velocity = rng.random_range(self.min_velocity..=self.max_velocity);
        SyntheticScenario {
            id: format!("syn{index:05}"),
            axle_positions: positions,
            axle_loads: loads,
            velocity,
            noise: NoiseLevel::RelativeToSignal(self.noise_fraction),
            seed: rng.random(),
            ..self.base.clone()
        }
    }

    pub fn generate(&self) -> Result<Vec<(PassageRecord, LabelSet)>> {
        self.validate()?;
        (0..self.n_passages).map(|i| simulate_passage(&self.scenario(i))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{label_passage, LabelOutcome, WheelLoadPeakParams};

    fn quiet() -> SyntheticScenario {
        SyntheticScenario {
            noise: NoiseLevel::Absolute(0.0),
            ..Default::default()
        }
    }

    #[test]
    fn zero_loads_give_zero_response() {
        let s = SyntheticScenario {
            axle_loads: vec![0.0; 4],
            ..quiet()
        };
        let (rec, _) = simulate_passage(&s).unwrap();
        assert!(rec.accel.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let s = SyntheticScenario {
            noise: NoiseLevel::Absolute(0.05),
            seed: 11,
            ..Default::default()
        };
        let (a, la) = simulate_passage(&s).unwrap();
        let (b, lb) = simulate_passage(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        let (c, _) = simulate_passage(&SyntheticScenario { seed: 12, ..s }).unwrap();
        assert_ne!(a.accel, c.accel);
    }

    #[test]
    fn doubling_loads_doubles_response() {
        let s = quiet();
        let (a, _) = simulate_passage(&s).unwrap();
        let doubled = SyntheticScenario {
            axle_loads: s.axle_loads.iter().map(|l| 2.0 * l).collect(),
            ..s
        };
        let (b, _) = simulate_passage(&doubled).unwrap();
        let scale = a.accel.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.accel.iter().zip(b.accel.iter()) {
            assert!((2.0 * x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn superposition_of_axle_sets() {
        let both = SyntheticScenario {
            axle_positions: vec![0.0, 3.0, 11.0, 14.0],
            axle_loads: vec![90e3, 0.0, 105e3, 0.0],
            ..quiet()
        };
        let first = SyntheticScenario {
            axle_loads: vec![90e3, 0.0, 0.0, 0.0],
            ..both.clone()
        };
        let second = SyntheticScenario {
            axle_loads: vec![0.0, 0.0, 105e3, 0.0],
            ..both.clone()
        };
        let (ab, _) = simulate_passage(&both).unwrap();
        let (a, _) = simulate_passage(&first).unwrap();
        let (b, _) = simulate_passage(&second).unwrap();
        let scale = ab.accel.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dev = ab
            .accel
            .iter()
            .zip(a.accel.iter().zip(b.accel.iter()))
            .map(|(s, (x, y))| (s - x - y).abs())
            .fold(0.0, f64::max);
        assert!(dev <= 1e-9 * scale, "deviation {dev} vs scale {scale}");
    }

    #[test]
    fn free_vibration_matches_closed_form() {
        // Impulse-free check of the propagator: release from q = 1, q' = 0.
        let (f, z, dt) = (6.9, 0.02, 1.0 / 600.0);
        let st = ModeStepper::new(f, z, 1.0, dt);
        let w = 2.0 * std::f64::consts::PI * f;
        let wd = w * (1.0 - z * z).sqrt();
        let mut q = [1.0, 0.0];
        for n in 1..=600 {
            q = [
                st.phi[0][0] * q[0] + st.phi[0][1] * q[1],
                st.phi[1][0] * q[0] + st.phi[1][1] * q[1],
            ];
            let t = n as f64 * dt;
            let exact = (-z * w * t).exp() * ((wd * t).cos() + z * w / wd * (wd * t).sin());
            assert!((q[0] - exact).abs() < 1e-10, "step {n}: {} vs {exact}", q[0]);
        }
    }

    #[test]
    fn constant_force_settles_to_static_deflection() {
        let st = ModeStepper::new(5.0, 0.3, 2.0, 1.0 / 600.0);
        let acc = st.run(&vec![10.0; 6000]);
        assert!(acc.last().unwrap().abs() < 1e-9);
    }

    #[test]
    fn ingest_recovers_velocity_and_axle_count() {
        let s = SyntheticScenario {
            velocity: 42.0,
            ..quiet()
        };
        let (rec, truth) = simulate_passage(&s).unwrap();
        let LabelOutcome::Accepted(labels) = label_passage(&rec, &WheelLoadPeakParams::default()).unwrap() else {
            panic!("synthetic passage rejected");
        };
        assert_eq!(labels.n_axles(), truth.n_axles());
        let samples_true = s.wlm_spacing * s.sample_rate / s.velocity;
        for &v in &labels.axle_velocities {
            let samples_est = s.wlm_spacing * s.sample_rate / v;
            assert!((samples_est - samples_true).abs() <= 1.0);
        }
        for (a, b) in labels.crossing_indices.iter().zip(truth.crossing_indices.iter()) {
            assert!(a.abs_diff(*b) <= 2, "{a} vs {b}");
        }
    }

    #[test]
    fn short_duration_rejected() {
        let s = SyntheticScenario {
            duration: Some(0.5),
            ..quiet()
        };
        assert!(matches!(simulate_passage(&s), Err(Error::DurationTooShort(_))));
    }

    #[test]
    fn invalid_scenarios_rejected() {
        let s = SyntheticScenario {
            axle_positions: vec![0.0, 0.0, 1.0, 2.0],
            ..quiet()
        };
        assert!(simulate_passage(&s).is_err());
        let s = SyntheticScenario {
            sensor_positions: vec![20.0],
            ..quiet()
        };
        assert!(simulate_passage(&s).is_err());
        let s = SyntheticScenario {
            velocity: 0.0,
            ..quiet()
        };
        assert!(simulate_passage(&s).is_err());
    }

    #[test]
    fn dataset_is_reproducible_and_in_range() {
        let cfg = SynthDatasetConfig {
            n_passages: 5,
            ..Default::default()
        };
        let a = cfg.generate().unwrap();
        let b = cfg.generate().unwrap();
        assert_eq!(a, b);
        for i in 0..5 {
            let s = cfg.scenario(i);
            assert!((2..=16).contains(&s.axle_positions.len()));
            assert!((10.0..=57.0).contains(&s.velocity));
        }
        let empty = SynthDatasetConfig {
            n_passages: 0,
            ..Default::default()
        };
        assert!(empty.generate().is_err());
    }
}
