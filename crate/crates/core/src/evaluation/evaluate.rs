use std::collections::BTreeMap;

use super::metrics::{Metric, MetricConvention};
use super::report::{MetricCell, MetricsReport, ReportEntry};
use super::split::{Role, SplitPlan};
use crate::error::{Error, Result};
use crate::forecaster::{Forecaster, Window};
use crate::ingest::TimeSeriesFrame;
use crate::seasonal::SeasonalComponents;

pub const DEFAULT_HORIZONS: [usize; 4] = [3, 6, 12, 24];

/// How test-block forecasts are produced and mapped back before scoring.
#[derive(Debug, Clone)]
pub struct EvalOptions<'a> {
    pub horizons: Vec<usize>,
    pub input_length: usize,
    /// Step between consecutive forecast origins.
    pub stride: usize,
    pub convention: MetricConvention,
    /// Added to predictions and actuals (the target's centering mean).
    pub target_offset: f64,
    /// When set, seasonal profiles are added back and scores are on the raw
    /// scale.
    pub seasonal: Option<&'a SeasonalComponents>,
    /// Replaces the frame's target as the scoring reference, indexed by
    /// frame row and already on the output scale.
    pub truth: Option<&'a [f64]>,
}

impl<'a> EvalOptions<'a> {
    pub fn new(input_length: usize) -> Self {
        Self {
            horizons: DEFAULT_HORIZONS.to_vec(),
            input_length,
            stride: 1,
            convention: MetricConvention::Standard,
            target_offset: 0.0,
            seasonal: None,
            truth: None,
        }
    }

    pub fn scale(&self) -> &'static str {
        if self.seasonal.is_some() {
            "raw"
        } else {
            "deseasonalized"
        }
    }
}

/// Paired forecasts at one lead time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HorizonForecasts {
    /// Frame row each value refers to.
    pub rows: Vec<usize>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
}

/// Rolls `model` over the test block. Every origin uses rows
/// `o..o + T` as input; the prediction for lead time `h` is compared with
/// row `o + T + h - 1`. Origins are shared across horizons so each horizon
/// sees the same windows.
pub fn forecast_test_block(
    model: &dyn Forecaster,
    plan: &SplitPlan,
    frame: &TimeSeriesFrame,
    target: &str,
    options: &EvalOptions,
) -> Result<BTreeMap<usize, HorizonForecasts>> {
    let target_idx = frame.channel_index(target)?;
    let max_h = *options.horizons.iter().max().ok_or(Error::EmptyInput)?;
    if options.horizons.contains(&0) {
        return Err(Error::InvalidConfig("horizons must be positive".into()));
    }
    if let Some(truth) = options.truth {
        if truth.len() != frame.len() {
            return Err(Error::LengthMismatch {
                left: truth.len(),
                right: frame.len(),
            });
        }
    }
    let t = options.input_length;
    let values = frame.channel(target)?;
    let restore = |row: usize, v: f64| -> f64 {
        let seasonal = options
            .seasonal
            .map_or(0.0, |s| s.seasonal_at(&frame.timestamps()[row]));
        v + options.target_offset + seasonal
    };
    let mut out: BTreeMap<usize, HorizonForecasts> =
        options.horizons.iter().map(|h| (*h, HorizonForecasts::default())).collect();
    for origin in plan.window_origins(Role::Test, t + max_h, options.stride) {
        let window = Window::from_frame(frame, origin, t, target_idx)?;
        if window.data().iter().any(|v| !v.is_finite()) {
            continue;
        }
        let pred = model.predict(&window, max_h)?;
        for (&h, cell) in out.iter_mut() {
            let row = origin + t + h - 1;
            let actual = match options.truth {
                Some(truth) => truth[row],
                None => restore(row, values[row]),
            };
            if !actual.is_finite() {
                continue;
            }
            cell.rows.push(row);
            cell.actual.push(actual);
            cell.predicted.push(restore(row, pred[h - 1]));
        }
    }
    Ok(out)
}

/// Scores every model at every horizon on the test block. A model whose
/// predictions fail, or a metric that is undefined, yields null cells
/// rather than an error.
pub fn evaluate(
    models: &[&dyn Forecaster],
    plan: &SplitPlan,
    frame: &TimeSeriesFrame,
    target: &str,
    options: &EvalOptions,
) -> Result<MetricsReport> {
    frame.channel_index(target)?;
    let mut entries = Vec::new();
    for model in models {
        let name = model.name();
        let loss = model.loss_label().unwrap_or_else(|| "none".into());
        match forecast_test_block(*model, plan, frame, target, options) {
            Ok(per_h) => {
                for (h, f) in per_h {
                    let cell = |m: Metric| match m.compute(&f.actual, &f.predicted, options.convention) {
                        Ok(v) => MetricCell::ok(v),
                        Err(e) => MetricCell::failed(e.kind()),
                    };
                    entries.push(ReportEntry {
                        model: name.clone(),
                        loss: loss.clone(),
                        horizon: h,
                        n_samples: f.actual.len(),
                        nmbf: cell(Metric::Nmbf),
                        nmaef: cell(Metric::Nmaef),
                        rmse: cell(Metric::Rmse),
                        corr: cell(Metric::Corr),
                    });
                }
            }
            Err(e) => {
                for &h in &options.horizons {
                    let failed = MetricCell::failed(e.kind());
                    entries.push(ReportEntry {
                        model: name.clone(),
                        loss: loss.clone(),
                        horizon: h,
                        n_samples: 0,
                        nmbf: failed.clone(),
                        nmaef: failed.clone(),
                        rmse: failed.clone(),
                        corr: failed,
                    });
                }
            }
        }
    }
    let mut horizons = options.horizons.clone();
    horizons.sort_unstable();
    horizons.dedup();
    Ok(MetricsReport {
        horizons,
        convention: options.convention,
        scale: options.scale().into(),
        entries,
    })
}
