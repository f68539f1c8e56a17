//! Hybrid forecaster: a learnable linear AR head over the target's lags
//! plus a dense leaky-ReLU network over the whole window and Time2Vec
//! features, trained with MSE or the bounded correntropy (MCCR) loss.
//!
//! Gradients are computed by hand; parameters are one flat vector so the
//! optimizer, checkpoints and finite-difference checks all share a layout.

mod checkpoint;
mod loss;
mod model;
mod time2vec;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointManifest, PARAMETER_ORDER};
pub use loss::{mccr_gradient, mccr_loss, mse_gradient, mse_loss, LossKind, LossSpec};
pub use model::{HybridConfig, HybridModel, WindowSpec};
pub use time2vec::{time2vec_forward, Time2Vec};
pub use train::{dataset_loss, train, Dataset, TrainConfig, TrainReport};

use crate::error::{Error, Result};
use crate::forecaster::{Forecaster, Window};

/// A trained [`HybridModel`] tagged with the loss it was trained under.
#[derive(Debug, Clone)]
pub struct HybridForecaster {
    pub model: HybridModel,
    pub loss: LossSpec,
}

impl Forecaster for HybridForecaster {
    fn name(&self) -> String {
        "Hybrid".into()
    }

    fn loss_label(&self) -> Option<String> {
        Some(self.loss.label().into())
    }

    fn predict(&self, window: &Window, horizon: usize) -> Result<Vec<f64>> {
        let h = self.model.spec().horizon;
        if horizon > h {
            return Err(Error::ShapeMismatch {
                expected: h,
                got: horizon,
            });
        }
        let mut out = self.model.forward(window)?;
        out.truncate(horizon);
        Ok(out)
    }
}
