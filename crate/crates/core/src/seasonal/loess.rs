//! Locally weighted polynomial regression (LOESS).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_normal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoessConfig {
    /// Fraction of the points used in each local fit, in (0, 1].
    pub span: f64,
    /// Degree of the local polynomial.
    pub degree: usize,
    /// Number of bisquare robustness passes after the initial fit.
    pub iterations: usize,
}

impl Default for LoessConfig {
    fn default() -> Self {
        Self {
            span: 0.15,
            degree: 2,
            iterations: 1,
        }
    }
}

impl LoessConfig {
    fn window(&self, n: usize) -> Result<usize> {
        if !(self.span > 0.0 && self.span <= 1.0) {
            return Err(Error::InvalidConfig(format!("LOESS span {} outside (0, 1]", self.span)));
        }
        if n < self.degree + 2 {
            return Err(Error::SeriesTooShort {
                len: n,
                needed: self.degree + 2,
            });
        }
        let q = (self.span * n as f64).ceil() as usize;
        if q < self.degree + 1 {
            return Err(Error::InvalidConfig(format!(
                "LOESS window of {q} points cannot support degree {}",
                self.degree
            )));
        }
        Ok(q.min(n))
    }
}

/// A LOESS smoother fitted to a set of points, including the robustness
/// weights of the final pass. Can be evaluated at arbitrary positions.
#[derive(Debug, Clone)]
pub struct Loess {
    xs: Vec<f64>,
    ys: Vec<f64>,
    robustness: Vec<f64>,
    window: usize,
    degree: usize,
}

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        (1.0 - u * u * u).powi(3)
    }
}

fn bisquare(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        (1.0 - u * u).powi(2)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl Loess {
    pub fn fit(points: &[(f64, f64)], cfg: LoessConfig) -> Result<Self> {
        let window = cfg.window(points.len())?;
        let mut sorted = points.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut model = Self {
            xs: sorted.iter().map(|p| p.0).collect(),
            ys: sorted.iter().map(|p| p.1).collect(),
            robustness: vec![1.0; sorted.len()],
            window,
            degree: cfg.degree,
        };
        for _ in 0..cfg.iterations {
            let fitted = model.fitted()?;
            let residuals: Vec<f64> = model.ys.iter().zip(&fitted).map(|(y, f)| y - f).collect();
            let abs: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
            let scale = abs.iter().sum::<f64>() / abs.len() as f64;
            let s = median(abs);
            // A (near) perfect fit leaves no scale to judge outliers by.
            if !(s > 1e-7 * scale) {
                break;
            }
            model.robustness = residuals.iter().map(|r| bisquare((r / (6.0 * s)).abs())).collect();
        }
        Ok(model)
    }

    fn fitted(&self) -> Result<Vec<f64>> {
        self.xs.iter().map(|&x| self.evaluate(x)).collect()
    }

    /// Index range of the `window` points nearest to `x0`.
    fn neighbourhood(&self, x0: f64) -> (usize, usize) {
        let n = self.xs.len();
        let q = self.window;
        let mut lo = self.xs.partition_point(|&x| x < x0).min(n);
        let mut hi = lo;
        while hi - lo < q {
            let take_left = if lo == 0 {
                false
            } else if hi == n {
                true
            } else {
                x0 - self.xs[lo - 1] <= self.xs[hi] - x0
            };
            if take_left {
                lo -= 1;
            } else {
                hi += 1;
            }
        }
        (lo, hi)
    }

    /// Local weighted polynomial estimate at `x0`.
    pub fn evaluate(&self, x0: f64) -> Result<f64> {
        let (lo, hi) = self.neighbourhood(x0);
        let reach = (x0 - self.xs[lo]).abs().max((self.xs[hi - 1] - x0).abs());
        // widen slightly so the farthest neighbour keeps a small positive weight
        let bandwidth = if reach > 0.0 { reach * 1.001 } else { 1.0 };
        let p = self.degree + 1;
        let mut ata = DMatrix::<f64>::zeros(p, p);
        let mut atb = DVector::<f64>::zeros(p);
        let mut basis = vec![0.0; p];
        for i in lo..hi {
            let w = tricube((self.xs[i] - x0).abs() / bandwidth) * self.robustness[i];
            if w == 0.0 {
                continue;
            }
            let u = (self.xs[i] - x0) / bandwidth;
            let mut pow = 1.0;
            for b in basis.iter_mut() {
                *b = pow;
                pow *= u;
            }
            for r in 0..p {
                atb[r] += w * basis[r] * self.ys[i];
                for c in 0..p {
                    ata[(r, c)] += w * basis[r] * basis[c];
                }
            }
        }
        let coef = solve_normal(ata, atb).ok_or(Error::DegenerateFit(x0))?;
        Ok(coef[0])
    }
}

/// Smooths `points` and returns the fitted value at each input position,
/// in input order.
pub fn loess_smooth(points: &[(f64, f64)], cfg: LoessConfig) -> Result<Vec<f64>> {
    let model = Loess::fit(points, cfg)?;
    points.iter().map(|&(x, _)| model.evaluate(x)).collect()
}
