use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which RMSE and correlation formulas to use. `Literal` keeps a `1/N`
/// factor outside the square root and in front of the Pearson ratio.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricConvention {
    #[default]
    Standard,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Nmbf,
    Nmaef,
    Rmse,
    Corr,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Nmbf, Metric::Nmaef, Metric::Rmse, Metric::Corr];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Nmbf => "NMBF",
            Metric::Nmaef => "NMAEF",
            Metric::Rmse => "RMSE",
            Metric::Corr => "Corr",
        }
    }

    pub fn compute(&self, actual: &[f64], predicted: &[f64], convention: MetricConvention) -> Result<f64> {
        match (self, convention) {
            (Metric::Nmbf, _) => nmbf(actual, predicted),
            (Metric::Nmaef, _) => nmaef(actual, predicted),
            (Metric::Rmse, MetricConvention::Standard) => rmse(actual, predicted),
            (Metric::Rmse, MetricConvention::Literal) => rmse_literal(actual, predicted),
            (Metric::Corr, MetricConvention::Standard) => corr(actual, predicted),
            (Metric::Corr, MetricConvention::Literal) => corr_literal(actual, predicted),
        }
    }
}

fn check(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Normalized mean bias factor; positive means overestimation.
pub fn nmbf(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    let (o, m) = (mean(actual), mean(predicted));
    if m >= o {
        if o == 0.0 {
            return Err(Error::ZeroMean);
        }
        Ok(m / o - 1.0)
    } else {
        if m == 0.0 {
            return Err(Error::ZeroMean);
        }
        Ok(1.0 - o / m)
    }
}

/// Normalized mean absolute error factor.
pub fn nmaef(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    let abs: f64 = actual.iter().zip(predicted).map(|(o, m)| (m - o).abs()).sum();
    let denom: f64 = if mean(predicted) >= mean(actual) {
        actual.iter().sum()
    } else {
        predicted.iter().sum()
    };
    if denom == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(abs / denom)
}

fn sum_sq_err(actual: &[f64], predicted: &[f64]) -> f64 {
    actual.iter().zip(predicted).map(|(o, m)| (m - o).powi(2)).sum()
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    Ok((sum_sq_err(actual, predicted) / actual.len() as f64).sqrt())
}

/// `(1/N) sqrt(sum e^2)`.
pub fn rmse_literal(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    Ok(sum_sq_err(actual, predicted).sqrt() / actual.len() as f64)
}

/// Pearson correlation.
pub fn corr(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    let (o, m) = (mean(actual), mean(predicted));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, p) in actual.iter().zip(predicted) {
        let (dx, dy) = (p - m, a - o);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation times `1/N`.
pub fn corr_literal(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    Ok(corr(actual, predicted)? / actual.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nmbf_branches() {
        assert_eq!(nmbf(&[1.0, 3.0], &[1.0, 3.0]).unwrap(), 0.0);
        assert_eq!(nmbf(&[1.0, 3.0], &[2.0, 6.0]).unwrap(), 1.0);
        assert_eq!(nmbf(&[2.0, 6.0], &[1.0, 3.0]).unwrap(), -1.0);
        assert!(matches!(nmbf(&[1.0, -1.0], &[2.0, 2.0]), Err(Error::ZeroMean)));
    }

    #[test]
    fn nmaef_branches() {
        assert_eq!(nmaef(&[1.0, 1.0], &[2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(nmaef(&[2.0, 2.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(nmaef(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(nmaef(&[1.0, -1.0], &[1.0, -1.0]), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn rmse_values() {
        assert_eq!(rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), (12.5f64).sqrt());
        assert_eq!(rmse_literal(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 2.5);
        assert!(matches!(rmse(&[0.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn corr_values() {
        let o = [1.0, 2.0, 4.0, 3.0];
        assert!((corr(&o, &o).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = o.iter().map(|x| -x).collect();
        assert!((corr(&o, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(corr(&o, &[1.0; 4]), Err(Error::ZeroVariance)));
        assert!((corr_literal(&o, &o).unwrap() - 0.25).abs() < 1e-15);
    }
}
