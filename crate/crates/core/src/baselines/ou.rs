use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diagnostics::AcfResult;
use crate::error::{Error, Result};
use crate::forecaster::{Forecaster, Window};

/// Parameters of `dx = (μ − x)/τ dt + √(2σ²/τ) dW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    /// Long-run mean.
    pub mu: f64,
    /// Stationary variance.
    pub sigma2: f64,
    /// Correlation time scale in hours.
    pub tau: f64,
}

/// Moment estimates of the OU parameters. `tau` is the trapezoidal
/// integral of the ACF from lag 0 up to its first entry into the
/// confidence band.
pub fn estimate_ou(series: &[f64], acf: &AcfResult) -> Result<OuParams> {
    let cutoff = acf.decorrelation_time.ok_or(Error::NoBandCrossing(acf.max_lag()))?;
    let n = series.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, needed: 2 });
    }
    let mu = crate::stats::mean(series);
    let sigma2 = series.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1) as f64;
    if !(sigma2 > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let tau: f64 = acf.values[..=cutoff].windows(2).map(|w| 0.5 * (w[0] + w[1])).sum();
    if !(tau > 0.0) {
        return Err(Error::NoBandCrossing(acf.max_lag()));
    }
    Ok(OuParams { mu, sigma2, tau })
}

/// Euler–Maruyama path of `steps` states after `x0`, one per step of `dt`.
pub fn simulate_ou(params: &OuParams, x0: f64, steps: usize, dt: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drift = dt / params.tau;
    let diffusion = (2.0 * params.sigma2 / params.tau).sqrt() * dt.sqrt();
    let mut x = x0;
    (0..steps)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            x += (params.mu - x) * drift + diffusion * z;
            x
        })
        .collect()
}

/// Mean over `n_paths` independent paths; path `i` uses seed `seed + i`.
pub fn ou_ensemble_mean(params: &OuParams, x0: f64, steps: usize, dt: f64, n_paths: usize, seed: u64) -> Vec<f64> {
    let mut sum = vec![0.0; steps];
    for i in 0..n_paths {
        let path = simulate_ou(params, x0, steps, dt, seed.wrapping_add(i as u64));
        sum.iter_mut().zip(&path).for_each(|(s, p)| *s += p);
    }
    sum.iter().map(|s| s / n_paths.max(1) as f64).collect()
}

/// Recursive hourly forecast: ensemble mean of simulated paths with dt = 1 h.
pub fn forecast_ou(params: &OuParams, x0: f64, horizon: usize, n_paths: usize, seed: u64) -> Vec<f64> {
    ou_ensemble_mean(params, x0, horizon, 1.0, n_paths, seed)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OuForecaster {
    pub params: OuParams,
    pub n_paths: usize,
    pub seed: u64,
}

impl Forecaster for OuForecaster {
    fn name(&self) -> String {
        "OU".into()
    }

    fn predict(&self, window: &Window, horizon: usize) -> Result<Vec<f64>> {
        let x0 = *window.target_series().last().ok_or(Error::EmptyInput)?;
        Ok(forecast_ou(&self.params, x0, horizon, self.n_paths, self.seed))
    }
}
