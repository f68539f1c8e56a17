use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{linear_fit, mean};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfaConfig {
    /// Order of the per-segment polynomial detrend.
    pub detrend_order: usize,
    /// Segment sizes; `None` selects [`geometric_sizes`].
    pub sizes: Option<Vec<usize>>,
    /// Number of grid points in the default geometric grid.
    pub grid_points: usize,
}

impl Default for DfaConfig {
    fn default() -> Self {
        Self {
            detrend_order: 2,
            sizes: None,
            grid_points: 16,
        }
    }
}

/// Dependence regime implied by the fluctuation exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DfaRegime {
    /// ξ ≥ 1 (h ≤ 1/2).
    ShortRange,
    /// 0 < ξ < 1 (1/2 < h < 1).
    LongRange,
    /// h ≥ 1: the series behaves like a non-stationary walk.
    NonStationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfaResult {
    pub segment_sizes: Vec<usize>,
    pub fluctuations: Vec<f64>,
    /// Log–log slope of V(s) over `fit_range`.
    pub h: f64,
    /// Correlation exponent ξ = 2(1 − h).
    pub xi: f64,
    pub regime: Option<DfaRegime>,
    pub fit_range: (usize, usize),
    pub detrend_order: usize,
}

/// `points` integer sizes spaced geometrically between `min` and `max`,
/// deduplicated.
pub fn geometric_sizes(min: usize, max: usize, points: usize) -> Vec<usize> {
    if points <= 1 || max <= min {
        return vec![min];
    }
    let ratio = (max as f64 / min as f64).ln() / (points - 1) as f64;
    let mut out: Vec<usize> = (0..points)
        .map(|i| (min as f64 * (ratio * i as f64).exp()).round() as usize)
        .collect();
    out.dedup();
    out
}

/// Orthonormal discrete polynomial basis of degree `order` on `s`
/// equally spaced points, row-major `(order + 1) × s`.
fn polynomial_basis(s: usize, order: usize) -> Option<Vec<Vec<f64>>> {
    let centre = (s as f64 - 1.0) / 2.0;
    let scale = (s as f64).max(1.0);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut v: Vec<f64> = (0..s).map(|i| ((i as f64 - centre) / scale).powi(k as i32)).collect();
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(norm > 1e-10) {
            return None;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
    }
    Some(basis)
}

fn segment_variance(seg: &[f64], basis: &[Vec<f64>], scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend_from_slice(seg);
    for q in basis {
        let dot: f64 = scratch.iter().zip(q).map(|(a, b)| a * b).sum();
        scratch.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
    }
    scratch.iter().map(|r| r * r).sum::<f64>() / seg.len() as f64
}

/// Detrended fluctuation analysis.
///
/// The profile is the cumulative sum of the mean-removed series. For each
/// segment size `s` the profile is cut into `N_s = ⌊N/s⌋` segments from
/// the start and another `N_s` from the end; each is detrended with an
/// order-`n` least-squares polynomial, and
/// `V(s) = sqrt(mean over 2N_s segments of the residual variance)`.
/// The exponent `h` is fitted over the upper half of the size grid.
pub fn dfa(series: &[f64], cfg: &DfaConfig) -> Result<DfaResult> {
    let n = series.len();
    if cfg.detrend_order < 1 {
        return Err(Error::InvalidConfig("DFA detrend order must be at least 1".into()));
    }
    let sizes = match &cfg.sizes {
        Some(s) => {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            s
        }
        None => {
            if n < 64 {
                return Err(Error::SeriesTooShort { len: n, needed: 64 });
            }
            geometric_sizes(16, n / 4, cfg.grid_points)
        }
    };
    let largest = *sizes.last().ok_or(Error::EmptyInput)?;
    if n < 4 * largest {
        return Err(Error::SeriesTooShort {
            len: n,
            needed: 4 * largest,
        });
    }

    let m = mean(series);
    let mut profile = Vec::with_capacity(n);
    let mut acc = 0.0;
    for v in series {
        acc += v - m;
        profile.push(acc);
    }

    let mut scratch = Vec::new();
    let mut fluctuations = Vec::with_capacity(sizes.len());
    for &s in &sizes {
        let basis = polynomial_basis(s, cfg.detrend_order).ok_or(Error::SingularDetrend(s))?;
        let ns = n / s;
        let mut total = 0.0;
        for k in 0..ns {
            total += segment_variance(&profile[k * s..(k + 1) * s], &basis, &mut scratch);
            total += segment_variance(&profile[n - (k + 1) * s..n - k * s], &basis, &mut scratch);
        }
        fluctuations.push((total / (2 * ns) as f64).sqrt());
    }

    let first = sizes.len() / 2;
    let fit_s = &sizes[first..];
    let fit_v = &fluctuations[first..];
    let h = if fit_s.len() >= 2 && fit_v.iter().all(|v| *v > 0.0) {
        let xs: Vec<f64> = fit_s.iter().map(|&s| (s as f64).ln()).collect();
        let ys: Vec<f64> = fit_v.iter().map(|v| v.ln()).collect();
        linear_fit(&xs, &ys).0
    } else {
        f64::NAN
    };
    let xi = 2.0 * (1.0 - h);
    let regime = if h.is_nan() {
        None
    } else if xi >= 1.0 {
        Some(DfaRegime::ShortRange)
    } else if xi > 0.0 {
        Some(DfaRegime::LongRange)
    } else {
        Some(DfaRegime::NonStationary)
    };
    Ok(DfaResult {
        fit_range: (fit_s[0], *fit_s.last().unwrap_or(&fit_s[0])),
        segment_sizes: sizes,
        fluctuations,
        h,
        xi,
        regime,
        detrend_order: cfg.detrend_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_has_zero_fluctuation() {
        let r = dfa(&vec![5.0; 4096], &DfaConfig::default()).unwrap();
        assert!(r.fluctuations.iter().all(|v| *v == 0.0));
        assert!(r.h.is_nan());
    }

    #[test]
    fn polynomial_profile_is_removed_exactly() {
        // a linear series integrates to a quadratic profile, which order-2 detrending removes
        let x: Vec<f64> = (0..4096).map(|i| 0.01 * i as f64).collect();
        let r = dfa(&x, &DfaConfig::default()).unwrap();
        let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(r.fluctuations.iter().all(|v| *v < 1e-8 * scale * 4096.0));
    }

    #[test]
    fn too_short_and_bad_order() {
        let x = vec![1.0; 100];
        let cfg = DfaConfig {
            sizes: Some(vec![10, 40]),
            ..DfaConfig::default()
        };
        assert!(matches!(dfa(&x, &cfg), Err(Error::SeriesTooShort { .. })));
        let cfg = DfaConfig {
            detrend_order: 0,
            ..DfaConfig::default()
        };
        assert!(matches!(dfa(&x, &cfg), Err(Error::InvalidConfig(_))));
        let cfg = DfaConfig {
            sizes: Some(vec![2, 4]),
            ..DfaConfig::default()
        };
        assert!(matches!(dfa(&x, &cfg), Err(Error::SingularDetrend(2))));
    }

    #[test]
    fn grid_is_geometric() {
        let g = geometric_sizes(16, 16384, 16);
        assert_eq!(g.first(), Some(&16));
        assert_eq!(g.last(), Some(&16384));
        assert_eq!(g.len(), 16);
    }
}
