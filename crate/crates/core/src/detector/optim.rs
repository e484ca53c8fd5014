use super::layers::{Param, Visit};

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    moments: Vec<(Vec<f32>, Vec<f32>)>,
}

impl Adam {
    pub fn new(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-7,
            step: 0,
            moments: Vec::new(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update to every trainable parameter and clears its gradient.
    pub fn step(&mut self, model: &mut dyn Visit) {
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (self.beta1, self.beta2);
        let lr_t = (self.learning_rate * (1.0 - b2.powi(t)).sqrt() / (1.0 - b1.powi(t))) as f32;
        let eps = (self.eps * (1.0 - b2.powi(t)).sqrt()) as f32;
        let (b1, b2) = (b1 as f32, b2 as f32);
        let moments = &mut self.moments;
        let mut k = 0;
        model.visit(&mut |p: &mut Param, trainable| {
            if !trainable {
                return;
            }
            if moments.len() == k {
                moments.push((vec![0.0; p.value.len()], vec![0.0; p.value.len()]));
            }
            let (m, v) = &mut moments[k];
            for i in 0..p.value.len() {
                let g = p.grad[i];
                m[i] = b1 * m[i] + (1.0 - b1) * g;
                v[i] = b2 * v[i] + (1.0 - b2) * g * g;
                p.value[i] -= lr_t * m[i] / (v[i].sqrt() + eps);
                p.grad[i] = 0.0;
            }
            k += 1;
        });
    }
}
