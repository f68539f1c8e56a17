use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Mse,
    Mccr,
}

/// Training loss selection. `beta` is set for MCCR only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl LossSpec {
    pub fn mse() -> Self {
        Self {
            kind: LossKind::Mse,
            beta: None,
        }
    }

    pub fn mccr(beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::NonPositiveBeta(beta));
        }
        Ok(Self {
            kind: LossKind::Mccr,
            beta: Some(beta),
        })
    }

    fn mccr_beta(&self) -> Result<f64> {
        self.beta.ok_or(Error::NonPositiveBeta(f64::NAN))
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            LossKind::Mse => "mse",
            LossKind::Mccr => "mccr",
        }
    }

    pub fn value(&self, actual: &[f64], predicted: &[f64]) -> Result<f64> {
        match self.kind {
            LossKind::Mse => mse_loss(actual, predicted),
            LossKind::Mccr => mccr_loss(actual, predicted, self.mccr_beta()?),
        }
    }

    pub fn gradient(&self, actual: &[f64], predicted: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            LossKind::Mse => mse_gradient(actual, predicted),
            LossKind::Mccr => mccr_gradient(actual, predicted, self.mccr_beta()?),
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

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) {
        return Err(Error::NonPositiveBeta(beta));
    }
    Ok(())
}

pub fn mse_loss(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    let n = actual.len() as f64;
    Ok(actual.iter().zip(predicted).map(|(a, p)| (a - p).powi(2)).sum::<f64>() / n)
}

/// `∂/∂predicted_i = −(2/N) e_i`.
pub fn mse_gradient(actual: &[f64], predicted: &[f64]) -> Result<Vec<f64>> {
    check(actual, predicted)?;
    let scale = 2.0 / actual.len() as f64;
    Ok(actual.iter().zip(predicted).map(|(a, p)| -scale * (a - p)).collect())
}

/// Mean correntropy-induced loss `β²(1 − exp(−e²/β²))`; bounded by β².
pub fn mccr_loss(actual: &[f64], predicted: &[f64], beta: f64) -> Result<f64> {
    check(actual, predicted)?;
    check_beta(beta)?;
    let b2 = beta * beta;
    let n = actual.len() as f64;
    Ok(actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| b2 * -(-(a - p).powi(2) / b2).exp_m1())
        .sum::<f64>()
        / n)
}

/// `∂/∂predicted_i = −(2/N) e_i exp(−e_i²/β²)`.
pub fn mccr_gradient(actual: &[f64], predicted: &[f64], beta: f64) -> Result<Vec<f64>> {
    check(actual, predicted)?;
    check_beta(beta)?;
    let b2 = beta * beta;
    let scale = 2.0 / actual.len() as f64;
    Ok(actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| {
            let e = a - p;
            -scale * e * (-e * e / b2).exp()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_error_zero_loss() {
        let a = [1.0, -2.0, 3.5];
        assert_eq!(mccr_loss(&a, &a, 2.0).unwrap(), 0.0);
        assert!(mccr_gradient(&a, &a, 2.0).unwrap().iter().all(|g| *g == 0.0));
    }

    #[test]
    fn unit_error_unit_beta() {
        let l = mccr_loss(&[1.0], &[0.0], 1.0).unwrap();
        assert!((l - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((l - 0.6321206).abs() < 1e-7);
    }

    #[test]
    fn bounded_by_beta_squared() {
        let l = mccr_loss(&[1e6, -1e6], &[0.0, 0.0], 3.0).unwrap();
        assert!(l <= 9.0);
    }

    #[test]
    fn gradient_peaks_then_decays() {
        let beta = 2.0;
        let g = |e: f64| mccr_gradient(&[e], &[0.0], beta).unwrap()[0].abs();
        let peak = beta / 2f64.sqrt();
        assert!(g(3.0 * beta) < g(peak));
        assert!(g(0.5 * peak) < g(peak));
        assert!(g(1.5 * peak) < g(peak));
    }

    #[test]
    fn errors() {
        assert!(matches!(mccr_loss(&[1.0], &[1.0, 2.0], 1.0), Err(Error::LengthMismatch { .. })));
        assert!(matches!(mccr_loss(&[1.0], &[1.0], 0.0), Err(Error::NonPositiveBeta(_))));
        assert!(matches!(LossSpec::mccr(-1.0), Err(Error::NonPositiveBeta(_))));
        assert!(matches!(mse_loss(&[], &[]), Err(Error::EmptyInput)));
    }
}
