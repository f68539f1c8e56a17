//! Blocked train/validation/test splits, forecast scoring, and a synthetic
//! data generator with known ground truth.

mod evaluate;
mod fit;
mod metrics;
mod report;
mod split;
mod synthetic;

pub use evaluate::{evaluate, forecast_test_block, EvalOptions, HorizonForecasts, DEFAULT_HORIZONS};
pub use fit::{train_ar, train_hybrid, train_ou, Access, AccessRecord, TrackedFrame};
pub use metrics::{corr, corr_literal, nmaef, nmbf, rmse, rmse_literal, Metric, MetricConvention};
pub use report::{MetricCell, MetricsReport, ReportEntry};
pub use split::{blocked_splits, Block, Role, SplitPlan};
pub use synthetic::{
    generate_synthetic, generate_synthetic_data, Contamination, CovariateSpec, NoiseSpec, SyntheticData, SyntheticSpec,
};
