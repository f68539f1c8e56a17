use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

const MIN_CCDF_POINTS: usize = 10;
const MIN_TAIL: usize = 50;
const MAX_XM_CANDIDATES: usize = 256;
const SIGMA_FLOOR: f64 = 1e-8;

/// Pareto tail `F̄(x) = (x_m / x)^α` for `x ≥ x_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub x_m: f64,
    pub alpha: f64,
    pub n_tail: usize,
    /// Kolmogorov–Smirnov distance between the empirical and fitted tail.
    pub ks: f64,
}

impl PowerLawFit {
    pub fn ccdf(&self, x: f64) -> f64 {
        if x < self.x_m {
            1.0
        } else {
            (self.x_m / x).powf(self.alpha)
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.alpha.ln() + self.alpha * self.x_m.ln() - (self.alpha + 1.0) * x.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalFit {
    pub mu: f64,
    pub sigma: f64,
}

impl LognormalFit {
    pub fn ccdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        0.5 * erfc((x.ln() - self.mu) / (std::f64::consts::SQRT_2 * self.sigma))
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x.ln() - self.mu) / self.sigma;
        -x.ln() - self.sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailModel {
    Powerlaw,
    Lognormal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub powerlaw: PowerLawFit,
    pub lognormal: LognormalFit,
    /// Lower bound of the points entering the likelihood ratio.
    pub threshold: f64,
    /// Σ over points `x ≥ threshold` of `ln f_LN(x | x ≥ threshold) − ln f_PL(x)`.
    pub loglik_ratio: f64,
    pub preferred: TailModel,
    pub n_tail: usize,
}

fn positive_sorted(series: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = series.iter().copied().filter(|x| *x > 0.0 && x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Empirical complementary CDF of the strictly positive values:
/// sorted unique `x` with `F̄(x)` = fraction of values strictly greater.
pub fn empirical_ccdf(series: &[f64]) -> Result<Vec<(f64, f64)>> {
    let v = positive_sorted(series);
    if v.is_empty() {
        return Err(Error::NoPositiveData);
    }
    if v.len() < MIN_CCDF_POINTS {
        return Err(Error::TailTooSmall {
            found: v.len(),
            needed: MIN_CCDF_POINTS,
        });
    }
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        out.push((v[i], (v.len() - 1 - j) as f64 / n));
        i = j + 1;
    }
    Ok(out)
}

/// MLE of α over `tail` (sorted, all ≥ `x_m`) and the KS distance of the fit.
fn fit_tail(tail: &[f64], x_m: f64) -> Option<PowerLawFit> {
    let log_sum: f64 = tail.iter().map(|x| (x / x_m).ln()).sum();
    if !(log_sum > 0.0) {
        return None;
    }
    let n = tail.len();
    let alpha = n as f64 / log_sum;
    let ks = tail
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let model = 1.0 - (x_m / x).powf(alpha);
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            (model - lo).abs().max((hi - model).abs())
        })
        .fold(0.0, f64::max);
    Some(PowerLawFit {
        x_m,
        alpha,
        n_tail: n,
        ks,
    })
}

/// Continuous maximum-likelihood power-law fit on the positive values.
///
/// With `x_m = None`, the scale is chosen among the unique values between
/// the 50th and 99th percentiles (at most 256 evenly spaced candidates)
/// by minimising the Kolmogorov–Smirnov distance.
pub fn fit_powerlaw(series: &[f64], x_m: Option<f64>) -> Result<PowerLawFit> {
    let v = positive_sorted(series);
    if v.is_empty() {
        return Err(Error::NoPositiveData);
    }
    let too_small = |found| Error::TailTooSmall {
        found,
        needed: MIN_TAIL,
    };
    if let Some(x_m) = x_m {
        if !(x_m > 0.0) {
            return Err(Error::InvalidConfig(format!("x_m must be positive, got {x_m}")));
        }
        let start = v.partition_point(|&x| x < x_m);
        let tail = &v[start..];
        if tail.len() < MIN_TAIL {
            return Err(too_small(tail.len()));
        }
        return fit_tail(tail, x_m).ok_or(too_small(0));
    }

    let n = v.len();
    let lo = v[(n as f64 * 0.5) as usize];
    let hi = v[((n as f64 * 0.99) as usize).min(n - 1)];
    let mut unique: Vec<f64> = v.iter().copied().filter(|&x| x >= lo && x <= hi).collect();
    unique.dedup();
    let step = unique.len().div_ceil(MAX_XM_CANDIDATES).max(1);
    let mut best: Option<PowerLawFit> = None;
    let mut largest_tail = 0;
    for &cand in unique.iter().step_by(step) {
        let start = v.partition_point(|&x| x < cand);
        let tail = &v[start..];
        largest_tail = largest_tail.max(tail.len());
        if tail.len() < MIN_TAIL {
            continue;
        }
        if let Some(fit) = fit_tail(tail, cand) {
            if best.is_none_or(|b| fit.ks < b.ks) {
                best = Some(fit);
            }
        }
    }
    best.ok_or(too_small(if largest_tail >= MIN_TAIL { 0 } else { largest_tail }))
}

/// Maximum-likelihood lognormal fit: mean and standard deviation of
/// `ln x`, with σ floored at 1e-8.
pub fn fit_lognormal(series: &[f64]) -> Result<LognormalFit> {
    if let Some(&bad) = series.iter().find(|x| !(**x > 0.0)) {
        return Err(Error::NonPositiveValue(bad));
    }
    if series.len() < MIN_CCDF_POINTS {
        return Err(Error::TailTooSmall {
            found: series.len(),
            needed: MIN_CCDF_POINTS,
        });
    }
    let logs: Vec<f64> = series.iter().map(|x| x.ln()).collect();
    let mu = crate::stats::mean(&logs);
    let sigma = crate::stats::variance(&logs).sqrt().max(SIGMA_FLOOR);
    Ok(LognormalFit { mu, sigma })
}

/// Likelihood-ratio comparison of the power-law and lognormal hypotheses.
///
/// The ratio is taken over the upper half of the positive values (at or
/// above their median, the lower end of the `x_m` search range). There
/// the power law is refitted by maximum likelihood, and the lognormal,
/// fitted to all positive values, is evaluated as a density conditioned
/// on the same threshold so both models share their support. The reported
/// `powerlaw` fit keeps the KS-selected `x_m`.
pub fn compare_tails(series: &[f64]) -> Result<TailFit> {
    let pos = positive_sorted(series);
    if pos.is_empty() {
        return Err(Error::NoPositiveData);
    }
    let powerlaw = fit_powerlaw(&pos, None)?;
    let lognormal = fit_lognormal(&pos)?;
    let threshold = pos[pos.len() / 2];
    let start = pos.partition_point(|&x| x < threshold);
    let tail = &pos[start..];
    let local = fit_tail(tail, threshold).ok_or(Error::TailTooSmall {
        found: 0,
        needed: MIN_TAIL,
    })?;
    let ln_norm = lognormal.ccdf(threshold).ln();
    let loglik_ratio: f64 = tail
        .iter()
        .map(|&x| (lognormal.ln_pdf(x) - ln_norm) - local.ln_pdf(x))
        .sum();
    Ok(TailFit {
        powerlaw,
        lognormal,
        threshold,
        loglik_ratio,
        preferred: if loglik_ratio > 0.0 {
            TailModel::Lognormal
        } else {
            TailModel::Powerlaw
        },
        n_tail: tail.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ccdf_counts_strictly_greater() {
        let mut s = vec![1.0, 2.0, 3.0, 4.0];
        s.extend([-1.0; 8]);
        s.extend([4.0, 4.0, 4.0, 3.0, 2.0, 1.0]);
        // 10 positive values: 1,1,2,2,3,3,4,4,4,4
        let c = empirical_ccdf(&s).unwrap();
        assert_eq!(c, vec![(1.0, 0.8), (2.0, 0.6), (3.0, 0.4), (4.0, 0.0)]);
    }

    #[test]
    fn ccdf_small_example_and_constant() {
        let s: Vec<f64> = (0..10).map(|i| [1.0, 2.0, 3.0, 4.0][i % 4]).collect();
        let c = empirical_ccdf(&[&s[..4], &s[..4], &s[..2]].concat()).unwrap();
        assert_eq!(c.first(), Some(&(1.0, 0.7)));
        assert_eq!(c.last(), Some(&(4.0, 0.0)));
        let c = empirical_ccdf(&[2.5; 12]).unwrap();
        assert_eq!(c, vec![(2.5, 0.0)]);
        assert!(matches!(empirical_ccdf(&[-1.0, 0.0]), Err(Error::NoPositiveData)));
    }

    #[test]
    fn degenerate_powerlaw_sample() {
        assert!(matches!(fit_powerlaw(&[3.0; 200], Some(3.0)), Err(Error::TailTooSmall { .. })));
        assert!(matches!(fit_powerlaw(&[3.0; 200], None), Err(Error::TailTooSmall { .. })));
    }

    #[test]
    fn lognormal_degenerate_and_invalid() {
        let f = fit_lognormal(&[std::f64::consts::E; 20]).unwrap();
        assert!((f.mu - 1.0).abs() < 1e-12);
        assert_eq!(f.sigma, SIGMA_FLOOR);
        assert!(matches!(fit_lognormal(&[1.0, 0.0]), Err(Error::NonPositiveValue(_))));
    }

    #[test]
    fn lognormal_median() {
        let f = LognormalFit { mu: 0.3, sigma: 1.2 };
        assert!((f.ccdf(0.3f64.exp()) - 0.5).abs() < 1e-12);
    }
}
