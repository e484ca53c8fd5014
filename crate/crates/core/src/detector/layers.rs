//! Network layers with explicit forward and backward passes.
//!
//! `forward` caches whatever the matching `backward` needs; `infer` leaves
//! the layer untouched and uses running batch-norm statistics. Gradients
//! accumulate into [`Param::grad`] until the optimizer clears them.

use rand::RngExt;
use rand_chacha::ChaCha8Rng;

use super::tensor::{gemm, Tensor};

/// A trainable parameter block and its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: Vec<f32>,
    pub grad: Vec<f32>,
}

impl Param {
    pub fn new(value: Vec<f32>) -> Self {
        let grad = vec![0.0; value.len()];
        Self { value, grad }
    }

    /// Glorot-uniform initialization.
    pub fn glorot(len: usize, fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt() as f32;
        Self::new((0..len).map(|_| rng.random_range(-limit..limit)).collect())
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
    }
}

/// Visitor over parameters (`trainable = true`) and persistent buffers
/// such as batch-norm running statistics (`trainable = false`), in a fixed
/// topological order.
pub trait Visit {
    fn visit(&mut self, f: &mut dyn FnMut(&mut Param, bool));
}

/// Taps of a `kt x kf` kernel that can touch real data for a `t x f`
/// input under same-padding.
fn active_taps(kt: usize, kf: usize, t: usize, f: usize) -> Vec<(usize, usize)> {
    let (pt, pf) = (kt / 2, kf / 2);
    let mut taps = Vec::with_capacity(kt * kf);
    for dt in 0..kt {
        if dt.abs_diff(pt) >= t {
            continue;
        }
        for df in 0..kf {
            if df.abs_diff(pf) >= f {
                continue;
            }
            taps.push((dt, df));
        }
    }
    taps
}

/// Valid output range `[lo, hi)` along an axis of length `len` for a tap
/// offset `d - pad`.
#[inline]
fn tap_range(len: usize, d: usize, pad: usize) -> (usize, usize) {
    let lo = pad.saturating_sub(d);
    let hi = (len + pad).saturating_sub(d).min(len);
    (lo, hi.max(lo))
}

/// Same-padded, stride-1 2-D convolution.
#[derive(Debug, Clone)]
pub struct Conv2d {
    pub cin: usize,
    pub cout: usize,
    pub kt: usize,
    pub kf: usize,
    /// `[cout][cin][kt][kf]`
    pub weight: Param,
    pub bias: Param,
    input: Option<Tensor>,
}

impl Conv2d {
    pub fn new(cin: usize, cout: usize, kt: usize, kf: usize, rng: &mut ChaCha8Rng) -> Self {
        let k = kt * kf;
        Self {
            cin,
            cout,
            kt,
            kf,
            weight: Param::glorot(cout * cin * k, cin * k, cout * k, rng),
            bias: Param::new(vec![0.0; cout]),
            input: None,
        }
    }

    fn pointwise(&self) -> bool {
        self.kt == 1 && self.kf == 1
    }

    fn packed_weight(&self, taps: &[(usize, usize)]) -> Vec<f32> {
        let kk = taps.len();
        let mut w = vec![0.0; self.cout * self.cin * kk];
        for co in 0..self.cout {
            for ci in 0..self.cin {
                for (j, &(dt, df)) in taps.iter().enumerate() {
                    w[(co * self.cin + ci) * kk + j] =
                        self.weight.value[((co * self.cin + ci) * self.kt + dt) * self.kf + df];
                }
            }
        }
        w
    }

    fn im2col(&self, item: &[f32], t: usize, f: usize, taps: &[(usize, usize)], col: &mut [f32]) {
        let (pt, pf) = (self.kt / 2, self.kf / 2);
        let plane = t * f;
        let kk = taps.len();
        col.iter_mut().for_each(|v| *v = 0.0);
        for ci in 0..self.cin {
            let src = &item[ci * plane..(ci + 1) * plane];
            for (j, &(dt, df)) in taps.iter().enumerate() {
                let dst = &mut col[(ci * kk + j) * plane..(ci * kk + j + 1) * plane];
                let (t_lo, t_hi) = tap_range(t, dt, pt);
                let (f_lo, f_hi) = tap_range(f, df, pf);
                for tt in t_lo..t_hi {
                    let ts = tt + dt - pt;
                    let fs = f_lo + df - pf;
                    let n = f_hi - f_lo;
                    dst[tt * f + f_lo..tt * f + f_lo + n].copy_from_slice(&src[ts * f + fs..ts * f + fs + n]);
                }
            }
        }
    }

    fn col2im(&self, col: &[f32], t: usize, f: usize, taps: &[(usize, usize)], item: &mut [f32]) {
        let (pt, pf) = (self.kt / 2, self.kf / 2);
        let plane = t * f;
        let kk = taps.len();
        for ci in 0..self.cin {
            let dst = &mut item[ci * plane..(ci + 1) * plane];
            for (j, &(dt, df)) in taps.iter().enumerate() {
                let src = &col[(ci * kk + j) * plane..(ci * kk + j + 1) * plane];
                let (t_lo, t_hi) = tap_range(t, dt, pt);
                let (f_lo, f_hi) = tap_range(f, df, pf);
                for tt in t_lo..t_hi {
                    let ts = tt + dt - pt;
                    let fs = f_lo + df - pf;
                    for k in 0..f_hi - f_lo {
                        dst[ts * f + fs + k] += src[tt * f + f_lo + k];
                    }
                }
            }
        }
    }

    pub fn infer(&self, x: &Tensor) -> Tensor {
        assert_eq!(x.c, self.cin, "conv input channels");
        let (t, f) = (x.t, x.f);
        let plane = t * f;
        let mut y = Tensor::zeros(x.n, self.cout, t, f);
        let taps = active_taps(self.kt, self.kf, t, f);
        let kk = taps.len();
        let w = self.packed_weight(&taps);
        let mut col = if self.pointwise() { Vec::new() } else { vec![0.0; self.cin * kk * plane] };
        for n in 0..x.n {
            let out = y.item_slice_mut(n);
            for co in 0..self.cout {
                out[co * plane..(co + 1) * plane].fill(self.bias.value[co]);
            }
            if self.pointwise() {
                gemm(self.cout, self.cin, plane, &w, false, x.item_slice(n), false, 1.0, out);
            } else {
                self.im2col(x.item_slice(n), t, f, &taps, &mut col);
                gemm(self.cout, self.cin * kk, plane, &w, false, &col, false, 1.0, out);
            }
        }
        y
    }

    pub fn forward(&mut self, x: &Tensor) -> Tensor {
        let y = self.infer(x);
        self.input = Some(x.clone());
        y
    }

    pub fn backward(&mut self, dy: &Tensor) -> Tensor {
        let x = self.input.take().expect("conv backward without forward");
        let (t, f) = (x.t, x.f);
        let plane = t * f;
        let taps = active_taps(self.kt, self.kf, t, f);
        let kk = taps.len();
        let w = self.packed_weight(&taps);
        let mut dw = vec![0.0; w.len()];
        let mut dx = x.zeros_like();
        let mut col = if self.pointwise() { Vec::new() } else { vec![0.0; self.cin * kk * plane] };
        let mut dcol = vec![0.0; self.cin * kk * plane];
        for n in 0..x.n {
            let g = dy.item_slice(n);
            for co in 0..self.cout {
                self.bias.grad[co] += g[co * plane..(co + 1) * plane].iter().sum::<f32>();
            }
            if self.pointwise() {
                gemm(self.cout, plane, self.cin, g, false, x.item_slice(n), true, 1.0, &mut dw);
                gemm(self.cin, self.cout, plane, &w, true, g, false, 0.0, dx.item_slice_mut(n));
            } else {
                self.im2col(x.item_slice(n), t, f, &taps, &mut col);
                gemm(self.cout, plane, self.cin * kk, g, false, &col, true, 1.0, &mut dw);
                gemm(self.cin * kk, self.cout, plane, &w, true, g, false, 0.0, &mut dcol);
                self.col2im(&dcol, t, f, &taps, dx.item_slice_mut(n));
            }
        }
        for co in 0..self.cout {
            for ci in 0..self.cin {
                for (j, &(dt, df)) in taps.iter().enumerate() {
                    self.weight.grad[((co * self.cin + ci) * self.kt + dt) * self.kf + df] +=
                        dw[(co * self.cin + ci) * kk + j];
                }
            }
        }
        dx
    }
}

impl Visit for Conv2d {
    fn visit(&mut self, f: &mut dyn FnMut(&mut Param, bool)) {
        f(&mut self.weight, true);
        f(&mut self.bias, true);
    }
}

/// Per-channel batch normalization over batch, time and frequency.
#[derive(Debug, Clone)]
pub struct BatchNorm {
    pub c: usize,
    pub gamma: Param,
    pub beta: Param,
    pub running_mean: Param,
    pub running_var: Param,
    pub momentum: f32,
    pub eps: f32,
    cache: Option<(Tensor, Vec<f32>)>,
}

impl BatchNorm {
    pub fn new(c: usize) -> Self {
        Self {
            c,
            gamma: Param::new(vec![1.0; c]),
            beta: Param::new(vec![0.0; c]),
            running_mean: Param::new(vec![0.0; c]),
            running_var: Param::new(vec![1.0; c]),
            momentum: 0.99,
            eps: 1e-3,
            cache: None,
        }
    }

    /// Normalization with the running statistics.
    pub fn infer(&self, x: &Tensor) -> Tensor {
        assert_eq!(x.c, self.c, "batch-norm channels");
        let plane = x.plane();
        let mut y = x.zeros_like();
        for c in 0..self.c {
                let inv = 1.0 / (self.running_var.value[c] + self.eps).sqrt();
                let scale = self.gamma.value[c] * inv;
                let shift = self.beta.value[c] - self.running_mean.value[c] * scale;
                for n in 0..x.n {
                    let off = x.idx(n, c, 0, 0);
                for (o, &v) in y.data[off..off + plane].iter_mut().zip(&x.data[off..off + plane]) {
                    *o = v * scale + shift;
                }
            }
        }
        y
    }

    /// Normalization with batch statistics; updates the running averages.
    pub fn forward(&mut self, x: &Tensor) -> Tensor {
        assert_eq!(x.c, self.c, "batch-norm channels");
        let plane = x.plane();
        let mut y = x.zeros_like();
        let count = (x.n * plane) as f64;
        let mut xhat = x.zeros_like();
        let mut inv_std = vec![0.0f32; self.c];
        for c in 0..self.c {
            let (mut sum, mut sq) = (0.0f64, 0.0f64);
            for n in 0..x.n {
                let off = x.idx(n, c, 0, 0);
                for &v in &x.data[off..off + plane] {
                    sum += v as f64;
                    sq += (v as f64) * (v as f64);
                }
            }
            let mean = sum / count;
            let var = (sq / count - mean * mean).max(0.0);
            let inv = 1.0 / (var + self.eps as f64).sqrt();
            inv_std[c] = inv as f32;
            let (mean32, inv32) = (mean as f32, inv as f32);
            let (g, b) = (self.gamma.value[c], self.beta.value[c]);
            for n in 0..x.n {
                let off = x.idx(n, c, 0, 0);
                for i in off..off + plane {
                    let h = (x.data[i] - mean32) * inv32;
                    xhat.data[i] = h;
                    y.data[i] = g * h + b;
                }
            }
            let m = self.momentum;
            self.running_mean.value[c] = m * self.running_mean.value[c] + (1.0 - m) * mean as f32;
            self.running_var.value[c] = m * self.running_var.value[c] + (1.0 - m) * var as f32;
        }
        self.cache = Some((xhat, inv_std));
        y
    }

    pub fn backward(&mut self, dy: &Tensor) -> Tensor {
        let (xhat, inv_std) = self.cache.take().expect("batch-norm backward without forward");
        let plane = dy.plane();
        let count = (dy.n * plane) as f64;
        let mut dx = dy.zeros_like();
        for c in 0..self.c {
            let (mut sum_dy, mut sum_dy_xhat) = (0.0f64, 0.0f64);
            for n in 0..dy.n {
                let off = dy.idx(n, c, 0, 0);
                for i in off..off + plane {
                    sum_dy += dy.data[i] as f64;
                    sum_dy_xhat += (dy.data[i] * xhat.data[i]) as f64;
                }
            }
            self.beta.grad[c] += sum_dy as f32;
            self.gamma.grad[c] += sum_dy_xhat as f32;
            let g = self.gamma.value[c];
            let k = g * inv_std[c];
            let mean_dy = (sum_dy / count) as f32;
            let mean_dy_xhat = (sum_dy_xhat / count) as f32;
            for n in 0..dy.n {
                let off = dy.idx(n, c, 0, 0);
                for i in off..off + plane {
                    dx.data[i] = k * (dy.data[i] - mean_dy - xhat.data[i] * mean_dy_xhat);
                }
            }
        }
        dx
    }
}

impl Visit for BatchNorm {
    fn visit(&mut self, f: &mut dyn FnMut(&mut Param, bool)) {
        f(&mut self.gamma, true);
        f(&mut self.beta, true);
        f(&mut self.running_mean, false);
        f(&mut self.running_var, false);
    }
}

#[derive(Debug, Clone, Default)]
pub struct Relu {
    output: Option<Tensor>,
}

pub fn relu_inplace(x: &mut Tensor) {
    x.data.iter_mut().for_each(|v| *v = v.max(0.0));
}

impl Relu {
    pub fn forward(&mut self, mut x: Tensor) -> Tensor {
        relu_inplace(&mut x);
        self.output = Some(x.clone());
        x
    }

    pub fn backward(&mut self, mut dy: Tensor) -> Tensor {
        let y = self.output.take().expect("relu backward without forward");
        for (g, &v) in dy.data.iter_mut().zip(&y.data) {
            if v <= 0.0 {
                *g = 0.0;
            }
        }
        dy
    }
}

/// 2x2 max pooling, stride 2 in time and frequency.
#[derive(Debug, Clone, Default)]
pub struct MaxPool {
    argmax: Option<(Vec<u8>, [usize; 4])>,
}

impl MaxPool {
    pub fn infer(&self, x: &Tensor) -> Tensor {
        Self::pool(x).0
    }

    pub fn forward(&mut self, x: &Tensor) -> Tensor {
        let (y, arg) = Self::pool(x);
        self.argmax = Some((arg, x.shape()));
        y
    }

    fn pool(x: &Tensor) -> (Tensor, Vec<u8>) {
        assert!(x.t % 2 == 0 && x.f % 2 == 0, "pooling needs even time and frequency extents");
        let (to, fo) = (x.t / 2, x.f / 2);
        let mut y = Tensor::zeros(x.n, x.c, to, fo);
        let mut arg = vec![0u8; y.data.len()];
        let mut o = 0;
        for n in 0..x.n {
            for c in 0..x.c {
                let base = x.idx(n, c, 0, 0);
                for t in 0..to {
                    for f in 0..fo {
                        let i00 = base + (2 * t) * x.f + 2 * f;
                        let cand = [x.data[i00], x.data[i00 + 1], x.data[i00 + x.f], x.data[i00 + x.f + 1]];
                        let mut best = 0;
                        for k in 1..4 {
                            if cand[k] > cand[best] {
                                best = k;
                            }
                        }
                        y.data[o] = cand[best];
                        arg[o] = best as u8;
                        o += 1;
                    }
                }
            }
        }
        (y, arg)
    }

    pub fn backward(&mut self, dy: &Tensor) -> Tensor {
        let (arg, [n_, c_, t_, f_]) = self.argmax.take().expect("pool backward without forward");
        let mut dx = Tensor::zeros(n_, c_, t_, f_);
        let (to, fo) = (t_ / 2, f_ / 2);
        let mut o = 0;
        for n in 0..n_ {
            for c in 0..c_ {
                let base = dx.idx(n, c, 0, 0);
                for t in 0..to {
                    for f in 0..fo {
                        let k = arg[o] as usize;
                        let i = base + (2 * t + k / 2) * f_ + 2 * f + k % 2;
                        dx.data[i] += dy.data[o];
                        o += 1;
                    }
                }
            }
        }
        dx
    }
}

/// Transposed convolution along time only: kernel 3x1, stride 2x1.
/// Output sample `2 i + k` receives `W[k] x[i]`; the output is exactly
/// twice as long as the input.
#[derive(Debug, Clone)]
pub struct TimeUpsample {
    pub cin: usize,
    pub cout: usize,
    /// `[3][cout][cin]`
    pub weight: Param,
    pub bias: Param,
    input: Option<Tensor>,
}

impl TimeUpsample {
    pub const KERNEL: usize = 3;

    pub fn new(cin: usize, cout: usize, rng: &mut ChaCha8Rng) -> Self {
        let k = Self::KERNEL;
        Self {
            cin,
            cout,
            weight: Param::glorot(k * cout * cin, cin * k, cout * k, rng),
            bias: Param::new(vec![0.0; cout]),
            input: None,
        }
    }

    pub fn infer(&self, x: &Tensor) -> Tensor {
        assert_eq!(x.c, self.cin, "upsample input channels");
        let k = Self::KERNEL;
        let (t, f) = (x.t, x.f);
        let plane = t * f;
        let mut y = Tensor::zeros(x.n, self.cout, 2 * t, f);
        let mut z = vec![0.0; k * self.cout * plane];
        for n in 0..x.n {
            gemm(k * self.cout, self.cin, plane, &self.weight.value, false, x.item_slice(n), false, 0.0, &mut z);
            let out = y.item_slice_mut(n);
            for co in 0..self.cout {
                let dst = &mut out[co * 2 * plane..(co + 1) * 2 * plane];
                dst.fill(self.bias.value[co]);
                for kk in 0..k {
                    let src = &z[(kk * self.cout + co) * plane..(kk * self.cout + co + 1) * plane];
                    for i in 0..t {
                        let to = 2 * i + kk;
                        if to >= 2 * t {
                            break;
                        }
                        for ff in 0..f {
                            dst[to * f + ff] += src[i * f + ff];
                        }
                    }
                }
            }
        }
        y
    }

    pub fn forward(&mut self, x: &Tensor) -> Tensor {
        let y = self.infer(x);
        self.input = Some(x.clone());
        y
    }

    pub fn backward(&mut self, dy: &Tensor) -> Tensor {
        let x = self.input.take().expect("upsample backward without forward");
        let k = Self::KERNEL;
        let (t, f) = (x.t, x.f);
        let plane = t * f;
        let mut dz = vec![0.0; k * self.cout * plane];
        let mut dx = x.zeros_like();
        for n in 0..x.n {
            let g = dy.item_slice(n);
            for co in 0..self.cout {
                let src = &g[co * 2 * plane..(co + 1) * 2 * plane];
                self.bias.grad[co] += src.iter().sum::<f32>();
                for kk in 0..k {
                    let dst = &mut dz[(kk * self.cout + co) * plane..(kk * self.cout + co + 1) * plane];
                    for i in 0..t {
                        let to = 2 * i + kk;
                        for ff in 0..f {
                            dst[i * f + ff] = if to < 2 * t { src[to * f + ff] } else { 0.0 };
                        }
                    }
                }
            }
            gemm(k * self.cout, plane, self.cin, &dz, false, x.item_slice(n), true, 1.0, &mut self.weight.grad);
            gemm(self.cin, k * self.cout, plane, &self.weight.value, true, &dz, false, 0.0, dx.item_slice_mut(n));
        }
        dx
    }
}

impl Visit for TimeUpsample {
    fn visit(&mut self, f: &mut dyn FnMut(&mut Param, bool)) {
        f(&mut self.weight, true);
        f(&mut self.bias, true);
    }
}

/// Fold the frequency axis into channels: `[n][c][t][f] -> [n][c*f][t][1]`.
pub fn collapse_frequency(x: &Tensor) -> Tensor {
    let mut y = Tensor::zeros(x.n, x.c * x.f, x.t, 1);
    for n in 0..x.n {
        for c in 0..x.c {
            for t in 0..x.t {
                for f in 0..x.f {
                    let o = y.idx(n, c * x.f + f, t, 0);
                    y.data[o] = x.data[x.idx(n, c, t, f)];
                }
            }
        }
    }
    y
}

/// Inverse of [`collapse_frequency`].
pub fn expand_frequency(dy: &Tensor, c: usize, f: usize) -> Tensor {
    assert_eq!(dy.c, c * f);
    let mut dx = Tensor::zeros(dy.n, c, dy.t, f);
    for n in 0..dy.n {
        for ci in 0..c {
            for t in 0..dy.t {
                for fi in 0..f {
                    let o = dx.idx(n, ci, t, fi);
                    dx.data[o] = dy.data[dy.idx(n, ci * f + fi, t, 0)];
                }
            }
        }
    }
    dx
}

/// Channel concatenation.
pub fn concat(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!((a.n, a.t, a.f), (b.n, b.t, b.f), "concat shape mismatch");
    let mut y = Tensor::zeros(a.n, a.c + b.c, a.t, a.f);
    for n in 0..a.n {
        let (ia, ib) = (a.item_slice(n), b.item_slice(n));
        let out = y.item_slice_mut(n);
        out[..ia.len()].copy_from_slice(ia);
        out[ia.len()..].copy_from_slice(ib);
    }
    y
}

/// Split a concatenated gradient back into its `ca`- and remaining-channel parts.
pub fn split(dy: &Tensor, ca: usize) -> (Tensor, Tensor) {
    let cb = dy.c - ca;
    let mut a = Tensor::zeros(dy.n, ca, dy.t, dy.f);
    let mut b = Tensor::zeros(dy.n, cb, dy.t, dy.f);
    let la = a.item();
    for n in 0..dy.n {
        let src = dy.item_slice(n);
        a.item_slice_mut(n).copy_from_slice(&src[..la]);
        b.item_slice_mut(n).copy_from_slice(&src[la..]);
    }
    (a, b)
}
