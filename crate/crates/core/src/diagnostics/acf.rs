use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{linear_fit, mean};

/// Two-sided 95% normal quantile used for the white-noise band.
pub const CONFIDENCE_Z: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dependence {
    ShortRange,
    LongRange,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    /// `values[r]` is the autocorrelation at lag `r`, `r = 0..=max_lag`.
    pub values: Vec<f64>,
    /// Half-width of the band `±z/√N`.
    pub confidence_band: f64,
    /// Smallest lag at which the ACF falls inside the band.
    pub decorrelation_time: Option<usize>,
    pub classification: Option<Dependence>,
    pub n: usize,
}

impl AcfResult {
    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }
}

/// Sample autocorrelation of the mean-centred series,
/// `C(r) = Σ x_t x_{t+r} / Σ x_t²`.
///
/// When `max_lag ≥ 100` the decay is also classified (see
/// [`classify_dependence`]); otherwise `classification` is `None`.
pub fn acf(series: &[f64], max_lag: usize) -> Result<AcfResult> {
    let n = series.len();
    if n <= max_lag {
        return Err(Error::SeriesTooShort {
            len: n,
            needed: max_lag + 1,
        });
    }
    let m = mean(series);
    let x: Vec<f64> = series.iter().map(|v| v - m).collect();
    let denom: f64 = x.iter().map(|v| v * v).sum();
    if !(denom > 0.0) || denom < 1e-24 * n as f64 * m.abs().max(1.0).powi(2) {
        return Err(Error::ZeroVariance);
    }
    let values: Vec<f64> = (0..=max_lag)
        .map(|r| x[..n - r].iter().zip(&x[r..]).map(|(a, b)| a * b).sum::<f64>() / denom)
        .collect();
    let band = CONFIDENCE_Z / (n as f64).sqrt();
    let decorrelation_time = (1..=max_lag).find(|&r| values[r].abs() <= band);
    let mut out = AcfResult {
        values,
        confidence_band: band,
        decorrelation_time,
        classification: None,
        n,
    };
    if max_lag >= 100 {
        out.classification = classify_dependence(&out).ok();
    }
    Ok(out)
}

/// Compares an exponential and a power-law decay fitted in log space to
/// the leading run of significantly positive lags.
///
/// Long-range when the power law fits better with exponent ξ in (0, 1);
/// short-range when the exponential fits better or ξ > 1; inconclusive
/// when fewer than three leading lags are significant or ξ ≤ 0.
pub fn classify_dependence(acf: &AcfResult) -> Result<Dependence> {
    let positive = acf.values.iter().skip(1).filter(|&&c| c > 0.0).count();
    if positive < 3 {
        return Err(Error::TooFewPositiveLags(positive));
    }
    let run: Vec<(f64, f64)> = acf
        .values
        .iter()
        .enumerate()
        .skip(1)
        .take_while(|(_, &c)| c > acf.confidence_band)
        .map(|(r, &c)| (r as f64, c.ln()))
        .collect();
    if run.len() < 3 {
        return Ok(Dependence::Inconclusive);
    }
    let lags: Vec<f64> = run.iter().map(|p| p.0).collect();
    let log_lags: Vec<f64> = lags.iter().map(|r| r.ln()).collect();
    let log_c: Vec<f64> = run.iter().map(|p| p.1).collect();
    let ssr = |x: &[f64]| {
        let (slope, icpt) = linear_fit(x, &log_c);
        let s: f64 = x.iter().zip(&log_c).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
        (s, slope)
    };
    let (ssr_exp, _) = ssr(&lags);
    let (ssr_pow, pow_slope) = ssr(&log_lags);
    let xi = -pow_slope;
    Ok(if ssr_exp <= ssr_pow || xi > 1.0 {
        Dependence::ShortRange
    } else if xi > 0.0 {
        Dependence::LongRange
    } else {
        Dependence::Inconclusive
    })
}

/// Partial autocorrelation at lags `1..=max_lag` via Durbin–Levinson.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = acf(series, max_lag)?.values;
    let mut out = Vec::with_capacity(max_lag);
    let mut phi: Vec<f64> = Vec::new();
    let mut v = 1.0;
    for k in 1..=max_lag {
        let num = rho[k] - phi.iter().enumerate().map(|(j, p)| p * rho[k - 1 - j]).sum::<f64>();
        let a = if v > 0.0 { num / v } else { 0.0 };
        let next: Vec<f64> = (0..phi.len()).map(|j| phi[j] - a * phi[phi.len() - 1 - j]).collect();
        phi = next;
        phi.push(a);
        v *= 1.0 - a * a;
        out.push(a);
    }
    Ok(out)
}
