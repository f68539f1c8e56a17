//! Heavy-tail-aware forecasting of hourly multivariate series.
//!
//! The crate covers the whole desk-scale pipeline:
//!
//! - [`ingest`]: CSV parsing, kNN imputation, wind-direction encoding, centering
//! - [`seasonal`]: three-scale additive seasonal adjustment with LOESS smoothing
//! - [`diagnostics`]: ACF, detrended fluctuation analysis, tail fits
//! - [`baselines`]: Ornstein–Uhlenbeck and AR(p) forecasters
//! - [`neural`]: hybrid AR + dense network with Time2Vec, trained under MSE or MCCR loss
//! - [`evaluation`]: blocked splits, bias/error factors, synthetic data

pub mod baselines;
pub mod diagnostics;
pub mod error;
pub mod evaluation;
pub mod forecaster;
pub mod ingest;
pub mod neural;
pub mod seasonal;

mod linalg;
mod stats;

pub use error::{Error, Result};
pub use forecaster::{Forecaster, Window};
pub use ingest::TimeSeriesFrame;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
