//! The contract shared by every forecaster.

use crate::error::{Error, Result};
use crate::ingest::TimeSeriesFrame;

/// A multivariate input window of `len` consecutive hours, stored row-major
/// (`data[t * n_channels + c]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    data: Vec<f64>,
    n_channels: usize,
    target: usize,
}

impl Window {
    pub fn new(data: Vec<f64>, n_channels: usize, target: usize) -> Result<Self> {
        if n_channels == 0 || data.len() % n_channels != 0 || target >= n_channels {
            return Err(Error::ShapeMismatch {
                expected: n_channels,
                got: data.len(),
            });
        }
        Ok(Self {
            data,
            n_channels,
            target,
        })
    }

    /// Rows `start..start + len` of `frame`, all channels in frame order.
    pub fn from_frame(frame: &TimeSeriesFrame, start: usize, len: usize, target: usize) -> Result<Self> {
        let n_channels = frame.channels().len();
        if start + len > frame.len() {
            return Err(Error::ShapeMismatch {
                expected: start + len,
                got: frame.len(),
            });
        }
        let mut data = Vec::with_capacity(len * n_channels);
        for t in start..start + len {
            for c in 0..n_channels {
                data.push(frame.value(t, c));
            }
        }
        Self::new(data, n_channels, target)
    }

    /// Single-channel window.
    pub fn univariate(values: &[f64]) -> Self {
        Self {
            data: values.to_vec(),
            n_channels: 1,
            target: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.n_channels
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn target_series(&self) -> Vec<f64> {
        self.data.iter().skip(self.target).step_by(self.n_channels).copied().collect()
    }
}

/// A fitted model that maps an input window to `horizon` future values of
/// the target channel.
pub trait Forecaster {
    fn name(&self) -> String;

    /// Training loss, for models where it is configurable.
    fn loss_label(&self) -> Option<String> {
        None
    }

    fn predict(&self, window: &Window, horizon: usize) -> Result<Vec<f64>>;
}
