#![allow(dead_code)]

use chrono::{NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2019, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
}

pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| StandardNormal.sample(&mut r)).collect()
}

/// `y_t = c + Σ φ_i y_{t-i} + ε_t`, unit innovations, 1000-step burn-in.
pub fn ar_series(phi: &[f64], c: f64, n: usize, seed: u64) -> Vec<f64> {
    let burn = 1000;
    let e = white_noise(n + burn, seed);
    let mut y = vec![0.0; n + burn];
    for t in 0..n + burn {
        let mut v = c + e[t];
        for (i, p) in phi.iter().enumerate() {
            if t > i {
                v += p * y[t - 1 - i];
            }
        }
        y[t] = v;
    }
    y.split_off(burn)
}

/// Inverse-CDF Pareto draws with scale `x_m` and CCDF exponent `alpha`.
pub fn pareto(n: usize, alpha: f64, x_m: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let u: f64 = 1.0 - r.random::<f64>();
            x_m * u.powf(-1.0 / alpha)
        })
        .collect()
}

pub fn lognormal(n: usize, mu: f64, sigma: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut r);
            (mu + sigma * z).exp()
        })
        .collect()
}

pub fn cumsum(x: &[f64]) -> Vec<f64> {
    x.iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
}
