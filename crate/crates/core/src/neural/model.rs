use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::LossSpec;
use super::time2vec::{time2vec_forward, Time2Vec};
use crate::error::{Error, Result};
use crate::forecaster::Window;
use crate::ingest::TimeSeriesFrame;

/// Shape of the model's input window and output horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub input_length: usize,
    pub horizon: usize,
    pub n_channels: usize,
    /// Index of the target channel.
    pub target: usize,
    pub target_channel: String,
}

impl WindowSpec {
    pub fn new<S: AsRef<str>>(input_length: usize, horizon: usize, channel_names: &[S], target_channel: &str) -> Result<Self> {
        let target = channel_names
            .iter()
            .position(|n| n.as_ref() == target_channel)
            .ok_or_else(|| Error::MissingColumn(target_channel.to_string()))?;
        let spec = Self {
            input_length,
            horizon,
            n_channels: channel_names.len(),
            target,
            target_channel: target_channel.to_string(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn for_frame(frame: &TimeSeriesFrame, input_length: usize, horizon: usize, target_channel: &str) -> Result<Self> {
        Self::new(input_length, horizon, &frame.channel_names(), target_channel)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.input_length < self.horizon {
            return Err(Error::InvalidConfig(format!(
                "window length {} must be at least horizon {} >= 1",
                self.input_length, self.horizon
            )));
        }
        if self.target >= self.n_channels {
            return Err(Error::InvalidConfig("target channel index out of range".into()));
        }
        Ok(())
    }

    /// Flattened window size `T * n`.
    pub fn input_size(&self) -> usize {
        self.input_length * self.n_channels
    }
}

/// Dense-network and time-encoding hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    pub hidden: Vec<usize>,
    pub leaky_slope: f64,
    pub t2v_k: usize,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            leaky_slope: 0.01,
            t2v_k: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct DenseLayer {
    w: usize,
    b: usize,
    fan_in: usize,
    fan_out: usize,
}

/// Offsets of every parameter block in the flat vector.
#[derive(Debug, Clone, PartialEq)]
struct Layout {
    ar_w: usize,
    ar_b: usize,
    dense: Vec<DenseLayer>,
    omega: usize,
    phi: usize,
    total: usize,
}

impl Layout {
    fn new(spec: &WindowSpec, config: &HybridConfig) -> Self {
        let t = spec.input_length;
        let h = spec.horizon;
        let mut off = 0;
        let ar_w = off;
        off += h * t;
        let ar_b = off;
        off += h;
        let mut sizes = vec![spec.input_size() + t * (config.t2v_k + 1)];
        sizes.extend(&config.hidden);
        sizes.push(h);
        let mut dense = Vec::new();
        for pair in sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let w = off;
            off += fan_in * fan_out;
            let b = off;
            off += fan_out;
            dense.push(DenseLayer { w, b, fan_in, fan_out });
        }
        let omega = off;
        off += config.t2v_k + 1;
        let phi = off;
        off += config.t2v_k + 1;
        Self {
            ar_w,
            ar_b,
            dense,
            omega,
            phi,
            total: off,
        }
    }
}

/// Sum of a linear AR head over the target channel's lags and a leaky-ReLU
/// dense network over the flattened window plus per-timestep Time2Vec
/// features. All parameters live in one flat vector, ordered: AR weights
/// (row-major `h x T`), AR bias, each dense layer's weights (row-major
/// `out x in`) then bias, Time2Vec ω, Time2Vec φ.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel {
    spec: WindowSpec,
    config: HybridConfig,
    params: Vec<f64>,
    layout: Layout,
}

struct Cache {
    targets: Vec<f64>,
    features: Vec<f64>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl HybridModel {
    pub fn new(spec: WindowSpec, config: HybridConfig, seed: u64) -> Result<Self> {
        spec.validate()?;
        if config.hidden.contains(&0) {
            return Err(Error::InvalidConfig("hidden layer width must be positive".into()));
        }
        let layout = Layout::new(&spec, &config);
        let mut params = vec![0.0; layout.total];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |params: &mut [f64], fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
            for p in params {
                *p = dist.sample(&mut rng);
            }
        };
        let (t, h) = (spec.input_length, spec.horizon);
        fill(&mut params[layout.ar_w..layout.ar_w + h * t], t, h);
        for l in &layout.dense {
            fill(&mut params[l.w..l.w + l.fan_in * l.fan_out], l.fan_in, l.fan_out);
        }
        let t2v = Time2Vec::seeded(config.t2v_k, t as f64);
        params[layout.omega..layout.phi].copy_from_slice(&t2v.omega);
        params[layout.phi..layout.total].copy_from_slice(&t2v.phi);
        Ok(Self {
            spec,
            config,
            params,
            layout,
        })
    }

    pub fn from_params(spec: WindowSpec, config: HybridConfig, params: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        let layout = Layout::new(&spec, &config);
        if params.len() != layout.total {
            return Err(Error::ShapeMismatch {
                expected: layout.total,
                got: params.len(),
            });
        }
        Ok(Self {
            spec,
            config,
            params,
            layout,
        })
    }

    pub fn spec(&self) -> &WindowSpec {
        &self.spec
    }

    pub fn config(&self) -> &HybridConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Layer widths from input to output.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layout.dense[0].fan_in];
        sizes.extend(self.layout.dense.iter().map(|l| l.fan_out));
        sizes
    }

    /// AR weights, row-major `h x T`.
    pub fn ar_weights(&self) -> &[f64] {
        &self.params[self.layout.ar_w..self.layout.ar_b]
    }

    pub fn ar_weights_mut(&mut self) -> &mut [f64] {
        &mut self.params[self.layout.ar_w..self.layout.ar_b]
    }

    pub fn ar_bias(&self) -> &[f64] {
        &self.params[self.layout.ar_b..self.layout.dense[0].w]
    }

    pub fn ar_bias_mut(&mut self) -> &mut [f64] {
        let end = self.layout.dense[0].w;
        &mut self.params[self.layout.ar_b..end]
    }

    /// Bias of the final dense layer.
    pub fn output_bias_mut(&mut self) -> &mut [f64] {
        let last = *self.layout.dense.last().expect("at least one layer");
        &mut self.params[last.b..last.b + last.fan_out]
    }

    pub fn zero_ar_head(&mut self) {
        let end = self.layout.dense[0].w;
        self.params[self.layout.ar_w..end].fill(0.0);
    }

    /// Zeroes every dense weight and bias; the Time2Vec parameters stay.
    pub fn zero_dense_net(&mut self) {
        let start = self.layout.dense[0].w;
        self.params[start..self.layout.omega].fill(0.0);
    }

    /// Zeroes dense weights only, keeping biases.
    pub fn zero_dense_weights(&mut self) {
        for l in self.layout.dense.clone() {
            self.params[l.w..l.w + l.fan_in * l.fan_out].fill(0.0);
        }
    }

    pub fn time2vec(&self) -> Time2Vec {
        Time2Vec {
            omega: self.params[self.layout.omega..self.layout.phi].to_vec(),
            phi: self.params[self.layout.phi..self.layout.total].to_vec(),
        }
    }

    /// `true` for entries that carry the L2 penalty (AR and dense weights,
    /// not biases or Time2Vec parameters).
    pub fn weight_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.layout.total];
        mask[self.layout.ar_w..self.layout.ar_b].fill(true);
        for l in &self.layout.dense {
            mask[l.w..l.w + l.fan_in * l.fan_out].fill(true);
        }
        mask
    }

    fn check_window(&self, window: &Window) -> Result<()> {
        if window.len() != self.spec.input_length {
            return Err(Error::ShapeMismatch {
                expected: self.spec.input_length,
                got: window.len(),
            });
        }
        if window.n_channels() != self.spec.n_channels {
            return Err(Error::ShapeMismatch {
                expected: self.spec.n_channels,
                got: window.n_channels(),
            });
        }
        if window.target() != self.spec.target {
            return Err(Error::ShapeMismatch {
                expected: self.spec.target,
                got: window.target(),
            });
        }
        Ok(())
    }

    /// All `h` predictions for one window.
    pub fn forward(&self, window: &Window) -> Result<Vec<f64>> {
        self.check_window(window)?;
        Ok(self.predict_batch(window.data(), 1))
    }

    /// `(ar_head, dense_net)` outputs, whose elementwise sum is [`forward`](Self::forward).
    pub fn forward_heads(&self, window: &Window) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_window(window)?;
        let cache = self.forward_cache(window.data(), 1);
        let dense = cache.post.last().expect("output layer").clone();
        let ar = self.ar_forward(&cache.targets, 1);
        Ok((ar, dense))
    }

    /// Predictions for `batch` flattened windows stored back to back; output
    /// is row-major `batch x h`.
    pub fn predict_batch(&self, inputs: &[f64], batch: usize) -> Vec<f64> {
        assert_eq!(inputs.len(), batch * self.spec.input_size(), "batch input size");
        self.forward_cache(inputs, batch).output
    }

    /// Mean data loss over the batch's `batch * h` outputs and its gradient
    /// with respect to every parameter. No L2 term.
    pub fn loss_and_gradient(&self, inputs: &[f64], targets: &[f64], batch: usize, loss: &LossSpec) -> Result<(f64, Vec<f64>)> {
        if inputs.len() != batch * self.spec.input_size() {
            return Err(Error::ShapeMismatch {
                expected: batch * self.spec.input_size(),
                got: inputs.len(),
            });
        }
        if targets.len() != batch * self.spec.horizon {
            return Err(Error::ShapeMismatch {
                expected: batch * self.spec.horizon,
                got: targets.len(),
            });
        }
        let cache = self.forward_cache(inputs, batch);
        let value = loss.value(targets, &cache.output)?;
        let d_out = loss.gradient(targets, &cache.output)?;
        Ok((value, self.backward(inputs, &cache, &d_out, batch)))
    }

    fn target_lags(&self, inputs: &[f64], batch: usize) -> Vec<f64> {
        let n = self.spec.n_channels;
        let size = self.spec.input_size();
        let mut out = Vec::with_capacity(batch * self.spec.input_length);
        for s in 0..batch {
            let row = &inputs[s * size..(s + 1) * size];
            out.extend(row.iter().skip(self.spec.target).step_by(n));
        }
        out
    }

    fn ar_forward(&self, targets: &[f64], batch: usize) -> Vec<f64> {
        let (t, h) = (self.spec.input_length, self.spec.horizon);
        let mut out = vec![0.0; batch * h];
        gemm(
            batch,
            t,
            h,
            targets,
            (t as isize, 1),
            self.ar_weights(),
            (1, t as isize),
            &mut out,
            (h as isize, 1),
        );
        add_bias(&mut out, self.ar_bias());
        out
    }

    fn t2v_features(&self) -> Vec<f64> {
        let omega = &self.params[self.layout.omega..self.layout.phi];
        let phi = &self.params[self.layout.phi..self.layout.total];
        (0..self.spec.input_length)
            .flat_map(|tau| time2vec_forward(tau as f64, omega, phi))
            .collect()
    }

    fn forward_cache(&self, inputs: &[f64], batch: usize) -> Cache {
        let slope = self.config.leaky_slope;
        let size = self.spec.input_size();
        let targets = self.target_lags(inputs, batch);
        let features = self.t2v_features();
        let mut pre = Vec::with_capacity(self.layout.dense.len());
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(self.layout.dense.len());
        let last = self.layout.dense.len() - 1;
        for (i, l) in self.layout.dense.iter().enumerate() {
            let w = &self.params[l.w..l.w + l.fan_in * l.fan_out];
            let b = &self.params[l.b..l.b + l.fan_out];
            let mut z = vec![0.0; batch * l.fan_out];
            if i == 0 {
                gemm(
                    batch,
                    size,
                    l.fan_out,
                    inputs,
                    (size as isize, 1),
                    w,
                    (1, l.fan_in as isize),
                    &mut z,
                    (l.fan_out as isize, 1),
                );
                // Time features are the same for every sample, so their
                // contribution folds into the bias.
                let shift: Vec<f64> = (0..l.fan_out)
                    .map(|o| {
                        let row = &w[o * l.fan_in + size..(o + 1) * l.fan_in];
                        b[o] + row.iter().zip(&features).map(|(a, f)| a * f).sum::<f64>()
                    })
                    .collect();
                add_bias(&mut z, &shift);
            } else {
                let input = &post[i - 1];
                gemm(
                    batch,
                    l.fan_in,
                    l.fan_out,
                    input,
                    (l.fan_in as isize, 1),
                    w,
                    (1, l.fan_in as isize),
                    &mut z,
                    (l.fan_out as isize, 1),
                );
                add_bias(&mut z, b);
            }
            let a = if i == last {
                z.clone()
            } else {
                z.iter().map(|&v| if v > 0.0 { v } else { slope * v }).collect()
            };
            pre.push(z);
            post.push(a);
        }
        let mut output = self.ar_forward(&targets, batch);
        for (o, d) in output.iter_mut().zip(&post[last]) {
            *o += d;
        }
        Cache {
            targets,
            features,
            pre,
            post,
            output,
        }
    }

    fn backward(&self, inputs: &[f64], cache: &Cache, d_out: &[f64], batch: usize) -> Vec<f64> {
        let (t, h) = (self.spec.input_length, self.spec.horizon);
        let size = self.spec.input_size();
        let slope = self.config.leaky_slope;
        let mut grad = vec![0.0; self.layout.total];

        // AR head.
        gemm(
            h,
            batch,
            t,
            d_out,
            (1, h as isize),
            &cache.targets,
            (t as isize, 1),
            &mut grad[self.layout.ar_w..self.layout.ar_b],
            (t as isize, 1),
        );
        column_sums(d_out, h, &mut grad[self.layout.ar_b..self.layout.ar_b + h]);

        // Dense net, output layer first.
        let mut delta = d_out.to_vec();
        for i in (0..self.layout.dense.len()).rev() {
            let l = self.layout.dense[i];
            let (fan_in, fan_out) = (l.fan_in, l.fan_out);
            let mut db = vec![0.0; fan_out];
            column_sums(&delta, fan_out, &mut db);
            grad[l.b..l.b + fan_out].copy_from_slice(&db);
            if i > 0 {
                let input = &cache.post[i - 1];
                gemm(
                    fan_out,
                    batch,
                    fan_in,
                    &delta,
                    (1, fan_out as isize),
                    input,
                    (fan_in as isize, 1),
                    &mut grad[l.w..l.w + fan_in * fan_out],
                    (fan_in as isize, 1),
                );
                let w = &self.params[l.w..l.w + fan_in * fan_out];
                let mut d_input = vec![0.0; batch * fan_in];
                gemm(
                    batch,
                    fan_out,
                    fan_in,
                    &delta,
                    (fan_out as isize, 1),
                    w,
                    (fan_in as isize, 1),
                    &mut d_input,
                    (fan_in as isize, 1),
                );
                for (d, z) in d_input.iter_mut().zip(&cache.pre[i - 1]) {
                    if *z <= 0.0 {
                        *d *= slope;
                    }
                }
                delta = d_input;
            } else {
                // Window part of the first layer's weights.
                let (w_grad, _) = grad[l.w..].split_at_mut(fan_in * fan_out);
                gemm(
                    fan_out,
                    batch,
                    size,
                    &delta,
                    (1, fan_out as isize),
                    inputs,
                    (size as isize, 1),
                    w_grad,
                    (fan_in as isize, 1),
                );
                // Time feature part: the summed delta times the shared features.
                let mut d_features = vec![0.0; cache.features.len()];
                let w = &self.params[l.w..l.w + fan_in * fan_out];
                for o in 0..fan_out {
                    let row = o * fan_in + size;
                    for (j, f) in cache.features.iter().enumerate() {
                        w_grad[row + j] = db[o] * f;
                        d_features[j] += db[o] * w[row + j];
                    }
                }
                self.t2v_backward(&d_features, &mut grad);
            }
        }
        grad
    }

    fn t2v_backward(&self, d_features: &[f64], grad: &mut [f64]) {
        let k1 = self.config.t2v_k + 1;
        let omega = &self.params[self.layout.omega..self.layout.phi];
        let phi = &self.params[self.layout.phi..self.layout.total];
        for tau in 0..self.spec.input_length {
            let tf = tau as f64;
            for i in 0..k1 {
                let d = d_features[tau * k1 + i];
                let local = if i == 0 { d } else { d * (omega[i] * tf + phi[i]).cos() };
                grad[self.layout.omega + i] += local * tf;
                grad[self.layout.phi + i] += local;
            }
        }
    }
}

fn add_bias(rows: &mut [f64], bias: &[f64]) {
    for row in rows.chunks_mut(bias.len()) {
        for (v, b) in row.iter_mut().zip(bias) {
            *v += b;
        }
    }
}

fn column_sums(rows: &[f64], width: usize, out: &mut [f64]) {
    out.fill(0.0);
    for row in rows.chunks(width) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
}

fn span(rows: usize, cols: usize, stride: (isize, isize)) -> usize {
    (rows - 1) * stride.0 as usize + (cols - 1) * stride.1 as usize + 1
}

/// `c = a * b` with `a: m x k`, `b: k x n`, `c: m x n`, all given by
/// (row, column) strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    sa: (isize, isize),
    b: &[f64],
    sb: (isize, isize),
    c: &mut [f64],
    sc: (isize, isize),
) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(c.len() >= span(m, n, sc), "gemm output bounds");
    if k == 0 {
        for i in 0..m {
            for j in 0..n {
                c[i * sc.0 as usize + j * sc.1 as usize] = 0.0;
            }
        }
        return;
    }
    assert!(a.len() >= span(m, k, sa), "gemm lhs bounds");
    assert!(b.len() >= span(k, n, sb), "gemm rhs bounds");
    // SAFETY: the asserts above keep every strided access inside the slices,
    // and `c` is borrowed mutably so it cannot alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            sa.0,
            sa.1,
            b.as_ptr(),
            sb.0,
            sb.1,
            0.0,
            c.as_mut_ptr(),
            sc.0,
            sc.1,
        );
    }
}
