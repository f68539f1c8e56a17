use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::LossSpec;
use super::model::{HybridModel, WindowSpec};
use crate::error::{Error, Result};
use crate::ingest::TimeSeriesFrame;

/// Precomputed (window, future target) pairs stored as two flat row-major
/// arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    spec: WindowSpec,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    origins: Vec<usize>,
}

impl Dataset {
    pub fn new(spec: WindowSpec) -> Self {
        Self {
            spec,
            inputs: Vec::new(),
            targets: Vec::new(),
            origins: Vec::new(),
        }
    }

    /// One sample per origin: rows `origin..origin + T` as input and the
    /// target channel at rows `origin + T..origin + T + h` as output.
    /// Samples touching a non-finite value are skipped.
    pub fn from_frame(frame: &TimeSeriesFrame, spec: &WindowSpec, origins: impl IntoIterator<Item = usize>) -> Result<Self> {
        if frame.channels().len() != spec.n_channels {
            return Err(Error::ShapeMismatch {
                expected: spec.n_channels,
                got: frame.channels().len(),
            });
        }
        let (t, h) = (spec.input_length, spec.horizon);
        let mut out = Self::new(spec.clone());
        let mut window = Vec::with_capacity(spec.input_size());
        let mut target = Vec::with_capacity(h);
        for origin in origins {
            if origin + t + h > frame.len() {
                return Err(Error::ShapeMismatch {
                    expected: origin + t + h,
                    got: frame.len(),
                });
            }
            window.clear();
            for row in origin..origin + t {
                for c in 0..spec.n_channels {
                    window.push(frame.value(row, c));
                }
            }
            target.clear();
            target.extend((origin + t..origin + t + h).map(|row| frame.value(row, spec.target)));
            if window.iter().chain(&target).all(|v| v.is_finite()) {
                out.push_sample(&window, &target, origin)?;
            }
        }
        Ok(out)
    }

    pub fn push(&mut self, window: &[f64], target: &[f64]) -> Result<()> {
        let origin = self.origins.len();
        self.push_sample(window, target, origin)
    }

    fn push_sample(&mut self, window: &[f64], target: &[f64], origin: usize) -> Result<()> {
        if window.len() != self.spec.input_size() {
            return Err(Error::ShapeMismatch {
                expected: self.spec.input_size(),
                got: window.len(),
            });
        }
        if target.len() != self.spec.horizon {
            return Err(Error::ShapeMismatch {
                expected: self.spec.horizon,
                got: target.len(),
            });
        }
        self.inputs.extend_from_slice(window);
        self.targets.extend_from_slice(target);
        self.origins.push(origin);
        Ok(())
    }

    pub fn spec(&self) -> &WindowSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Frame row of each sample's first input hour.
    pub fn origins(&self) -> &[usize] {
        &self.origins
    }

    pub fn input(&self, i: usize) -> &[f64] {
        let size = self.spec.input_size();
        &self.inputs[i * size..(i + 1) * size]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        let h = self.spec.horizon;
        &self.targets[i * h..(i + 1) * h]
    }

    fn gather(&self, idx: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let mut inputs = Vec::with_capacity(idx.len() * self.spec.input_size());
        let mut targets = Vec::with_capacity(idx.len() * self.spec.horizon);
        for &i in idx {
            inputs.extend_from_slice(self.input(i));
            targets.extend_from_slice(self.target(i));
        }
        (inputs, targets)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            learning_rate: 1e-4,
            l2: 1e-4,
            max_epochs: 500,
            patience: 20,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Per-epoch losses. `train_loss` is the sample-weighted mean of the batch
/// data losses seen during the epoch; `val_loss` is empty without a
/// validation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainReport {
    pub fn epochs(&self) -> usize {
        self.train_loss.len()
    }
}

/// Mean data loss of `model` over a whole dataset, evaluated in chunks.
pub fn dataset_loss(model: &HybridModel, data: &Dataset, loss: &LossSpec) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let chunk = 512;
    let size = data.spec.input_size();
    let h = data.spec.horizon;
    let mut total = 0.0;
    for start in (0..data.len()).step_by(chunk) {
        let end = (start + chunk).min(data.len());
        let pred = model.predict_batch(&data.inputs[start * size..end * size], end - start);
        let value = loss.value(&data.targets[start * h..end * h], &pred)?;
        total += value * (end - start) as f64;
    }
    Ok(total / data.len() as f64)
}

/// Adam with L2 on weights, per-epoch shuffling from `seed`, and early
/// stopping on the validation loss (training loss when `val` is `None`).
/// The model ends with the parameters of the best monitored epoch.
pub fn train(
    model: &mut HybridModel,
    data: &Dataset,
    val: Option<&Dataset>,
    loss: &LossSpec,
    config: &TrainConfig,
    seed: u64,
) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if val.is_some_and(|v| v.is_empty()) {
        return Err(Error::EmptyDataset);
    }
    if data.spec != *model.spec() || val.is_some_and(|v| v.spec != *model.spec()) {
        return Err(Error::InvalidConfig("dataset window spec differs from the model's".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::InvalidConfig("batch size must be positive".into()));
    }
    let mask = model.weight_mask();
    let n = model.n_params();
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut step = 0i32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..data.len()).collect();

    let mut report = TrainReport {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        best_epoch: 0,
        stopped_early: false,
    };
    let mut best = f64::INFINITY;
    let mut best_params = model.params().to_vec();
    let mut since_best = 0;

    for epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for idx in order.chunks(config.batch_size) {
            let (inputs, targets) = data.gather(idx);
            let (value, mut grad) = model.loss_and_gradient(&inputs, &targets, idx.len(), loss)?;
            if !value.is_finite() {
                return Err(Error::DivergedLoss(epoch));
            }
            epoch_loss += value * idx.len() as f64;
            step += 1;
            let params = model.params_mut();
            let c1 = 1.0 - config.beta1.powi(step);
            let c2 = 1.0 - config.beta2.powi(step);
            for i in 0..n {
                if mask[i] {
                    grad[i] += 2.0 * config.l2 * params[i];
                }
                m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
                v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
                params[i] -= config.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + config.epsilon);
            }
        }
        let train_loss = epoch_loss / data.len() as f64;
        report.train_loss.push(train_loss);
        let monitored = match val {
            Some(val) => {
                let l = dataset_loss(model, val, loss)?;
                report.val_loss.push(l);
                l
            }
            None => train_loss,
        };
        if !monitored.is_finite() {
            return Err(Error::DivergedLoss(epoch));
        }
        if monitored < best {
            best = monitored;
            best_params.copy_from_slice(model.params());
            report.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                report.stopped_early = true;
                break;
            }
        }
    }
    model.params_mut().copy_from_slice(&best_params);
    Ok(report)
}
