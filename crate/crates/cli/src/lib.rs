//! Command-line pipeline: synth, decompose, diagnose, fit, forecast and
//! evaluate, each writing into a run directory indexed by `manifest.json`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod pipeline;

pub use config::{default_beta, ModelChoice, ModelKind, RunConfig};
pub use error::CliError;
pub use experiment::{robustness_trial, LossScores, RobustnessTrial};
pub use pipeline::{prepare, run, Command, Manifest, Prepared};
