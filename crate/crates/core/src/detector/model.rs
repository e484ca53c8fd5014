use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{
    collapse_frequency, concat, expand_frequency, relu_inplace, split, BatchNorm, Conv2d, MaxPool, Param, Relu,
    TimeUpsample, Visit,
};
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub depth: usize,
    pub base_feature_maps: usize,
    pub input_channels: usize,
    pub input_scales: usize,
    pub kernel_time: usize,
    pub kernel_freq: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            depth: 4,
            base_feature_maps: 16,
            input_channels: 6,
            input_scales: 16,
            kernel_time: 3,
            kernel_freq: 3,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.depth > 16 {
            return Err(Error::Config(format!("depth must be in 1..=16, got {}", self.depth)));
        }
        if self.input_scales != 1 << self.depth {
            return Err(Error::Config(format!(
                "input_scales ({}) must equal 2^depth ({}) so frequency collapses to 1",
                self.input_scales,
                1usize << self.depth
            )));
        }
        if self.base_feature_maps == 0 || self.input_channels == 0 {
            return Err(Error::Config("feature-map and channel counts must be positive".into()));
        }
        if self.kernel_time % 2 == 0 || self.kernel_freq % 2 == 0 {
            return Err(Error::Config("kernel sizes must be odd".into()));
        }
        Ok(())
    }

    /// Feature maps at encoder level `level`; `level == depth` is the bottleneck.
    pub fn feature_maps(&self, level: usize) -> usize {
        self.base_feature_maps << level
    }

    /// Time lengths fed to the network must be multiples of this.
    pub fn time_multiple(&self) -> usize {
        1 << self.depth
    }
}

/// Batch norm, convolution, ReLU.
#[derive(Debug, Clone)]
pub struct ConvBlock {
    bn: BatchNorm,
    conv: Conv2d,
    relu: Relu,
}

impl ConvBlock {
    fn new(cin: usize, cout: usize, kt: usize, kf: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            bn: BatchNorm::new(cin),
            conv: Conv2d::new(cin, cout, kt, kf, rng),
            relu: Relu::default(),
        }
    }

    fn infer(&self, x: &Tensor) -> Tensor {
        let mut y = self.conv.infer(&self.bn.infer(x));
        relu_inplace(&mut y);
        y
    }

    fn forward(&mut self, x: &Tensor) -> Tensor {
        let h = self.bn.forward(x);
        let y = self.conv.forward(&h);
        self.relu.forward(y)
    }

    fn backward(&mut self, dy: Tensor) -> Tensor {
        let g = self.relu.backward(dy);
        let g = self.conv.backward(&g);
        self.bn.backward(&g)
    }
}

impl Visit for ConvBlock {
    fn visit(&mut self, f: &mut dyn FnMut(&mut Param, bool)) {
        self.bn.visit(f);
        self.conv.visit(f);
    }
}

/// Filter path of 1x1, kxk, 1x1 conv blocks plus a 1x1 conv-block skip.
#[derive(Debug, Clone)]
pub struct ResidualBlock {
    path: [ConvBlock; 3],
    skip: ConvBlock,
}

impl ResidualBlock {
    fn new(cin: usize, cout: usize, kt: usize, kf: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            path: [
                ConvBlock::new(cin, cout, 1, 1, rng),
                ConvBlock::new(cout, cout, kt, kf, rng),
                ConvBlock::new(cout, cout, 1, 1, rng),
            ],
            skip: ConvBlock::new(cin, cout, 1, 1, rng),
        }
    }

    fn infer(&self, x: &Tensor) -> Tensor {
        let mut y = self.path.iter().fold(x.clone(), |h, b| b.infer(&h));
        y.add_assign(&self.skip.infer(x));
        y
    }

    fn forward(&mut self, x: &Tensor) -> Tensor {
        let mut y = self.path.iter_mut().fold(x.clone(), |h, b| b.forward(&h));
        y.add_assign(&self.skip.forward(x));
        y
    }

    fn backward(&mut self, dy: Tensor) -> Tensor {
        let mut dx = self.skip.backward(dy.clone());
        let through = self.path.iter_mut().rev().fold(dy, |g, b| b.backward(g));
        dx.add_assign(&through);
        dx
    }
}

impl Visit for ResidualBlock {
    fn visit(&mut self, f: &mut dyn FnMut(&mut Param, bool)) {
        for b in &mut self.path {
            b.visit(f);
        }
        self.skip.visit(f);
    }
}

/// Conv block then residual block.
#[derive(Debug, Clone)]
struct Stage {
    cb: ConvBlock,
    res: ResidualBlock,
}

impl Stage {
    fn new(cin: usize, cout: usize, cfg: &ModelConfig, rng: &mut ChaCha8Rng) -> Self {
        Self {
            cb: ConvBlock::new(cin, cout, cfg.kernel_time, cfg.kernel_freq, rng),
            res: ResidualBlock::new(cout, cout, cfg.kernel_time, cfg.kernel_freq, rng),
        }
    }

    fn infer(&self, x: &Tensor) -> Tensor {
        self.res.infer(&self.cb.infer(x))
    }

    fn forward(&mut self, x: &Tensor) -> Tensor {
        let h = self.cb.forward(x);
        self.res.forward(&h)
    }

    fn backward(&mut self, dy: Tensor) -> Tensor {
        let g = self.res.backward(dy);
        self.cb.backward(g)
    }
}

impl Visit for Stage {
    fn visit(&mut self, f: &mut dyn FnMut(&mut Param, bool)) {
        self.cb.visit(f);
        self.res.visit(f);
    }
}

#[derive(Debug, Clone)]
struct DecoderLevel {
    up: TimeUpsample,
    adapt: Conv2d,
    stage: Stage,
    skip_channels: usize,
    skip_scales: usize,
}

/// Shapes observed during one forward pass, `[n, c, t, f]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ForwardTrace {
    pub input: [usize; 4],
    pub encoder: Vec<[usize; 4]>,
    pub bottleneck: [usize; 4],
    pub decoder: Vec<[usize; 4]>,
    pub output: [usize; 4],
}

/// Encoder/decoder network producing one logit per time step.
#[derive(Debug, Clone)]
pub struct Network {
    config: ModelConfig,
    encoders: Vec<(Stage, MaxPool)>,
    bottleneck: Stage,
    /// Deepest level first.
    decoders: Vec<DecoderLevel>,
    head: Conv2d,
}

impl Network {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (kt, kf) = (config.kernel_time, config.kernel_freq);
        let mut encoders = Vec::with_capacity(config.depth);
        let mut cin = config.input_channels;
        for level in 0..config.depth {
            let c = config.feature_maps(level);
            encoders.push((Stage::new(cin, c, &config, &mut rng), MaxPool::default()));
            cin = c;
        }
        let bottleneck = Stage::new(cin, config.feature_maps(config.depth), &config, &mut rng);
        let mut decoders = Vec::with_capacity(config.depth);
        for level in (0..config.depth).rev() {
            let c = config.feature_maps(level);
            let scales = config.input_scales >> level;
            decoders.push(DecoderLevel {
                up: TimeUpsample::new(config.feature_maps(level + 1), c, &mut rng),
                adapt: Conv2d::new(c * scales, c, 1, 1, &mut rng),
                stage: Stage::new(2 * c, c, &config, &mut rng),
                skip_channels: c,
                skip_scales: scales,
            });
        }
        let head = Conv2d::new(config.feature_maps(0), 1, kt, kf, &mut rng);
        Ok(Self {
            config,
            encoders,
            bottleneck,
            decoders,
            head,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn check_input(&self, x: &Tensor) {
        assert_eq!(x.c, self.config.input_channels, "network input channels");
        assert_eq!(x.f, self.config.input_scales, "network input scales");
        assert_eq!(x.t % self.config.time_multiple(), 0, "network input length");
    }

    /// Logits `[n, 1, t, 1]` using running batch-norm statistics.
    pub fn infer(&self, x: &Tensor) -> Tensor {
        self.infer_traced(x).0
    }

    pub fn infer_traced(&self, x: &Tensor) -> (Tensor, ForwardTrace) {
        self.check_input(x);
        let mut trace = ForwardTrace {
            input: x.shape(),
            ..Default::default()
        };
        let mut skips = Vec::with_capacity(self.encoders.len());
        let mut h = x.clone();
        for (stage, pool) in &self.encoders {
            let s = stage.infer(&h);
            trace.encoder.push(s.shape());
            h = pool.infer(&s);
            skips.push(s);
        }
        h = self.bottleneck.infer(&h);
        trace.bottleneck = h.shape();
        for (d, s) in self.decoders.iter().zip(skips.iter().rev()) {
            let u = d.up.infer(&h);
            let a = d.adapt.infer(&collapse_frequency(s));
            h = d.stage.infer(&concat(&u, &a));
            trace.decoder.push(h.shape());
        }
        let y = self.head.infer(&h);
        trace.output = y.shape();
        (y, trace)
    }

    /// Training-mode forward pass; caches activations for [`Network::backward`].
    pub fn forward(&mut self, x: &Tensor) -> Tensor {
        self.check_input(x);
        let mut skips = Vec::with_capacity(self.encoders.len());
        let mut h = x.clone();
        for (stage, pool) in &mut self.encoders {
            let s = stage.forward(&h);
            h = pool.forward(&s);
            skips.push(s);
        }
        h = self.bottleneck.forward(&h);
        for (d, s) in self.decoders.iter_mut().zip(skips.iter().rev()) {
            let u = d.up.forward(&h);
            let a = d.adapt.forward(&collapse_frequency(s));
            h = d.stage.forward(&concat(&u, &a));
        }
        self.head.forward(&h)
    }

    /// Back-propagates logit gradients, accumulating parameter gradients.
    pub fn backward(&mut self, dlogits: &Tensor) {
        let mut g = self.head.backward(dlogits);
        // shallowest decoder first; skip gradients come out shallow to deep
        let mut skip_grads = Vec::with_capacity(self.decoders.len());
        for d in self.decoders.iter_mut().rev() {
            g = d.stage.backward(g);
            let (du, da) = split(&g, d.up.cout);
            let ds = d.adapt.backward(&da);
            skip_grads.push(expand_frequency(&ds, d.skip_channels, d.skip_scales));
            g = d.up.backward(&du);
        }
        g = self.bottleneck.backward(g);
        for ((stage, pool), ds) in self.encoders.iter_mut().rev().zip(skip_grads.into_iter().rev()) {
            let mut gs = pool.backward(&g);
            gs.add_assign(&ds);
            g = stage.backward(gs);
        }
    }

    pub fn n_parameters(&mut self) -> usize {
        let mut n = 0;
        self.visit(&mut |p, trainable| {
            if trainable {
                n += p.value.len();
            }
        });
        n
    }
}

impl Visit for Network {
    fn visit(&mut self, f: &mut dyn FnMut(&mut Param, bool)) {
        for (stage, _) in &mut self.encoders {
            stage.visit(f);
        }
        self.bottleneck.visit(f);
        for d in &mut self.decoders {
            d.up.visit(f);
            d.adapt.visit(f);
            d.stage.visit(f);
        }
        self.head.visit(f);
    }
}
