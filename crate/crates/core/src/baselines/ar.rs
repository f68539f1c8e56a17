use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{pacf, CONFIDENCE_Z};
use crate::error::{Error, Result};
use crate::forecaster::{Forecaster, Window};
use crate::linalg::solve_normal;

/// `Y_t = c + φ_1 Y_{t−1} + … + φ_p Y_{t−p} + ε_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    pub order: usize,
    /// `coefficients[i]` multiplies `Y_{t−1−i}`.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub noise_variance: f64,
}

impl ArModel {
    /// One-step prediction from the most recent `order` values (oldest first).
    pub fn predict_next(&self, history: &[f64]) -> f64 {
        let n = history.len();
        self.intercept
            + self
                .coefficients
                .iter()
                .enumerate()
                .map(|(i, phi)| phi * history[n - 1 - i])
                .sum::<f64>()
    }
}

/// PACF cut-off order: the number of leading lags whose partial
/// autocorrelation lies outside `±1.96/√N`, at least 1 and at most `max_p`.
pub fn select_ar_order(series: &[f64], max_p: usize) -> Result<usize> {
    if max_p == 0 {
        return Err(Error::InvalidConfig("max_p must be at least 1".into()));
    }
    let band = CONFIDENCE_Z / (series.len() as f64).sqrt();
    let p = pacf(series, max_p)?;
    let leading = p.iter().take_while(|v| v.abs() > band).count();
    Ok(leading.clamp(1, max_p))
}

/// Conditional least squares on a single contiguous series.
pub fn fit_ar(series: &[f64], p: usize) -> Result<ArModel> {
    fit_ar_segments(&[series], p)
}

/// Conditional least squares over several contiguous segments; no lag
/// regressor reaches across a segment boundary.
pub fn fit_ar_segments(segments: &[&[f64]], p: usize) -> Result<ArModel> {
    if p == 0 {
        return Err(Error::InvalidConfig("AR order must be at least 1".into()));
    }
    let total: usize = segments.iter().map(|s| s.len()).sum();
    if total <= 10 * p {
        return Err(Error::SeriesTooShort {
            len: total,
            needed: 10 * p + 1,
        });
    }
    let k = p + 1;
    let mut ata = DMatrix::<f64>::zeros(k, k);
    let mut atb = DVector::<f64>::zeros(k);
    let mut row = vec![0.0; k];
    let mut count = 0usize;
    for seg in segments {
        for t in p..seg.len() {
            row[0] = 1.0;
            for i in 0..p {
                row[i + 1] = seg[t - 1 - i];
            }
            for r in 0..k {
                atb[r] += row[r] * seg[t];
                for c in 0..k {
                    ata[(r, c)] += row[r] * row[c];
                }
            }
            count += 1;
        }
    }
    let beta = match solve_normal(ata.clone(), atb.clone()) {
        Some(b) => b,
        None => {
            // rank-deficient (e.g. constant data): minimum-norm solution
            let tol = 1e-10 * ata.diagonal().amax();
            ata.svd(true, true).solve(&atb, tol).map_err(|_| Error::SingularSystem)?
        }
    };
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let mut model = ArModel {
        order: p,
        coefficients: beta.iter().skip(1).copied().collect(),
        intercept: beta[0],
        noise_variance: 0.0,
    };
    let mut ssr = 0.0;
    for seg in segments {
        for t in p..seg.len() {
            ssr += (seg[t] - model.predict_next(&seg[t - p..t])).powi(2);
        }
    }
    model.noise_variance = ssr / count as f64;
    Ok(model)
}

/// Recursive multi-step forecast; predictions replace unknown lags.
pub fn forecast_ar(model: &ArModel, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
    if history.len() < model.order {
        return Err(Error::SeriesTooShort {
            len: history.len(),
            needed: model.order,
        });
    }
    let mut buf: Vec<f64> = history[history.len() - model.order..].to_vec();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let next = model.predict_next(&buf[buf.len() - model.order..]);
        buf.push(next);
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArForecaster {
    pub model: ArModel,
}

impl Forecaster for ArForecaster {
    fn name(&self) -> String {
        format!("AR({})", self.model.order)
    }

    fn predict(&self, window: &Window, horizon: usize) -> Result<Vec<f64>> {
        forecast_ar(&self.model, &window.target_series(), horizon)
    }
}
