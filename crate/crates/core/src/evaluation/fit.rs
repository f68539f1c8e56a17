use std::cell::RefCell;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::split::{Role, SplitPlan};
use crate::baselines::{estimate_ou, fit_ar_segments, select_ar_order, ArForecaster, OuForecaster};
use crate::diagnostics::acf;
use crate::error::{Error, Result};
use crate::ingest::TimeSeriesFrame;
use crate::neural::{train, Dataset, HybridConfig, HybridForecaster, HybridModel, LossSpec, TrainConfig, TrainReport, WindowSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Access {
    /// Rows used to estimate parameters.
    Fit,
    /// Rows used only to monitor early stopping.
    Validate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessRecord {
    pub purpose: Access,
    pub rows: Range<usize>,
}

/// A frame wrapper that logs every row range handed to a fitting routine.
#[derive(Debug)]
pub struct TrackedFrame<'a> {
    frame: &'a TimeSeriesFrame,
    log: RefCell<Vec<AccessRecord>>,
}

impl<'a> TrackedFrame<'a> {
    pub fn new(frame: &'a TimeSeriesFrame) -> Self {
        Self {
            frame,
            log: RefCell::new(Vec::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.is_empty()
    }

    pub fn rows(&self, purpose: Access, rows: Range<usize>) -> TimeSeriesFrame {
        self.log.borrow_mut().push(AccessRecord {
            purpose,
            rows: rows.clone(),
        });
        self.frame.slice(rows)
    }

    pub fn log(&self) -> Vec<AccessRecord> {
        self.log.borrow().clone()
    }

    fn target_segments(&self, plan: &SplitPlan, target: &str) -> Result<Vec<Vec<f64>>> {
        self.frame.channel_index(target)?;
        plan.ranges(Role::Train)
            .into_iter()
            .map(|r| Ok(self.rows(Access::Fit, r).channel(target)?.to_vec()))
            .collect()
    }

    fn dataset(&self, plan: &SplitPlan, role: Role, spec: &WindowSpec) -> Result<Dataset> {
        let purpose = if role == Role::Train { Access::Fit } else { Access::Validate };
        let span = spec.input_length + spec.horizon;
        let mut out = Dataset::new(spec.clone());
        for range in plan.ranges(role) {
            if range.len() < span {
                continue;
            }
            let block = self.rows(purpose, range.clone());
            let part = Dataset::from_frame(&block, spec, 0..=block.len() - span)?;
            for i in 0..part.len() {
                out.push(part.input(i), part.target(i))?;
            }
        }
        Ok(out)
    }
}

/// OU parameters from the concatenated training blocks of `target`.
pub fn train_ou(
    data: &TrackedFrame,
    plan: &SplitPlan,
    target: &str,
    max_lag: usize,
    n_paths: usize,
    seed: u64,
) -> Result<OuForecaster> {
    let series: Vec<f64> = data.target_segments(plan, target)?.concat();
    let acf = acf(&series, max_lag.min(series.len().saturating_sub(1)))?;
    Ok(OuForecaster {
        params: estimate_ou(&series, &acf)?,
        n_paths,
        seed,
    })
}

/// AR model with PACF-selected order, fitted jointly on the training blocks
/// without regressing across block gaps.
pub fn train_ar(data: &TrackedFrame, plan: &SplitPlan, target: &str, max_p: usize) -> Result<ArForecaster> {
    let segments = data.target_segments(plan, target)?;
    let longest = segments.iter().max_by_key(|s| s.len()).ok_or(Error::EmptyDataset)?;
    let p = select_ar_order(longest, max_p)?;
    let refs: Vec<&[f64]> = segments.iter().map(Vec::as_slice).collect();
    Ok(ArForecaster {
        model: fit_ar_segments(&refs, p)?,
    })
}

/// Trains a hybrid model on windows inside training blocks, early-stopping
/// on windows inside validation blocks when there are any.
#[allow(clippy::too_many_arguments)]
pub fn train_hybrid(
    data: &TrackedFrame,
    plan: &SplitPlan,
    spec: &WindowSpec,
    config: &HybridConfig,
    train_config: &TrainConfig,
    loss: &LossSpec,
    seed: u64,
) -> Result<(HybridForecaster, TrainReport)> {
    let train_set = data.dataset(plan, Role::Train, spec)?;
    let val_set = data.dataset(plan, Role::Validation, spec)?;
    let mut model = HybridModel::new(spec.clone(), config.clone(), seed)?;
    let val = (!val_set.is_empty()).then_some(&val_set);
    let report = train(&mut model, &train_set, val, loss, train_config, seed.wrapping_add(1))?;
    Ok((HybridForecaster { model, loss: *loss }, report))
}
