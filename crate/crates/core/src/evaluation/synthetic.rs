use std::f64::consts::PI;

use chrono::{NaiveDate, NaiveDateTime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Channel, TimeSeriesFrame};

const HOURS_PER_YEAR: f64 = 8766.0;
const BURN_IN: usize = 2000;

/// Marginal law of the AR-filtered noise term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseSpec {
    None,
    /// Gaussian with standard deviation `sigma`.
    Gaussian { sigma: f64 },
    /// `exp(mu + sigma z)` with `z` the unit-variance AR process.
    Lognormal { mu: f64, sigma: f64 },
}

/// Sparse positive spikes added to the observed target only: with
/// probability `rate` per hour, a lognormal(`mu`, `sigma`) draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contamination {
    pub rate: f64,
    pub mu: f64,
    pub sigma: f64,
}

/// A covariate that tracks the clean target `lead` hours ahead:
/// `gain * (clean[t + lead] - level) + N(0, noise_sigma²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateSpec {
    pub name: String,
    pub gain: f64,
    pub lead: usize,
    pub noise_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub start: NaiveDateTime,
    pub n_hours: usize,
    pub target: String,
    pub level: f64,
    pub yearly_amplitude: f64,
    pub weekly_amplitude: f64,
    pub daily_amplitude: f64,
    /// AR coefficients of the noise filter; empty means white noise.
    pub ar: Vec<f64>,
    pub noise: NoiseSpec,
    pub contamination: Option<Contamination>,
    pub covariates: Vec<CovariateSpec>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2018, 1, 1)
                .and_then(|d| d.and_hms_opt(0, 0, 0))
                .expect("valid date"),
            n_hours: 3 * 8760,
            target: "pm10".into(),
            level: 40.0,
            yearly_amplitude: 10.0,
            weekly_amplitude: 3.0,
            daily_amplitude: 6.0,
            ar: vec![0.8],
            noise: NoiseSpec::Gaussian { sigma: 5.0 },
            contamination: None,
            covariates: Vec::new(),
        }
    }
}

/// Sum of squared impulse-response weights, i.e. the stationary variance
/// of the AR filter driven by unit innovations.
fn stationary_variance(ar: &[f64]) -> Result<f64> {
    let mut psi = vec![1.0];
    let mut total = 1.0;
    for j in 1..200_000 {
        let next: f64 = ar.iter().enumerate().filter(|(i, _)| *i < j).map(|(i, a)| a * psi[j - 1 - i]).sum();
        psi.push(next);
        total += next * next;
        if !total.is_finite() || total > 1e12 {
            break;
        }
        let tail = psi[psi.len().saturating_sub(ar.len().max(1))..].iter().map(|p| p.abs()).sum::<f64>();
        if j > ar.len() && tail < 1e-15 {
            return Ok(total);
        }
    }
    Err(Error::InvalidConfig(format!("AR coefficients {ar:?} are not stationary")))
}

fn unit_ar_noise(ar: &[f64], n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let scale = 1.0 / stationary_variance(ar)?.sqrt();
    let mut z = vec![0.0; n + BURN_IN];
    for t in 0..z.len() {
        let e: f64 = StandardNormal.sample(rng);
        let past: f64 = ar
            .iter()
            .enumerate()
            .filter(|(i, _)| *i < t)
            .map(|(i, a)| a * z[t - 1 - i])
            .sum();
        z[t] = past + scale * e;
    }
    Ok(z.split_off(BURN_IN))
}

/// The generated frame plus the target before contamination.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub frame: TimeSeriesFrame,
    pub clean_target: Vec<f64>,
}

/// Deterministic synthetic hourly data: level + yearly, weekly and daily
/// sinusoids + AR-filtered noise, optional target contamination and
/// covariates. The `SyntheticSpec` and seed are stored in the frame metadata.
pub fn generate_synthetic_data(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticData> {
    let n = spec.n_hours;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = match spec.noise {
        NoiseSpec::None => vec![0.0; n],
        NoiseSpec::Gaussian { sigma } => unit_ar_noise(&spec.ar, n, &mut rng)?.into_iter().map(|z| sigma * z).collect(),
        NoiseSpec::Lognormal { mu, sigma } => unit_ar_noise(&spec.ar, n, &mut rng)?
            .into_iter()
            .map(|z| (mu + sigma * z).exp())
            .collect(),
    };
    let clean: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64;
            spec.level
                + spec.yearly_amplitude * (2.0 * PI * t / HOURS_PER_YEAR).sin()
                + spec.weekly_amplitude * (2.0 * PI * t / 168.0).sin()
                + spec.daily_amplitude * (2.0 * PI * t / 24.0).sin()
                + noise[i]
        })
        .collect();

    let mut observed = clean.clone();
    if let Some(c) = &spec.contamination {
        let mut spike_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0001);
        for v in observed.iter_mut() {
            let u: f64 = rand::Rng::random(&mut spike_rng);
            let z: f64 = StandardNormal.sample(&mut spike_rng);
            if u < c.rate {
                *v += (c.mu + c.sigma * z).exp();
            }
        }
    }

    let mut channels = vec![Channel {
        name: spec.target.clone(),
        unit: String::new(),
        values: observed,
    }];
    let mut cov_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0002);
    for cov in &spec.covariates {
        // The last `lead` hours repeat the final clean value.
        let values = (0..n)
            .map(|t| {
                let z: f64 = StandardNormal.sample(&mut cov_rng);
                let src = clean[(t + cov.lead).min(n - 1)];
                cov.gain * (src - spec.level) + cov.noise_sigma * z
            })
            .collect();
        channels.push(Channel {
            name: cov.name.clone(),
            unit: String::new(),
            values,
        });
    }
    let mut frame = TimeSeriesFrame::hourly(spec.start, n, channels)?;
    frame.set_metadata("generator", serde_json::to_string(spec)?);
    frame.set_metadata("seed", seed.to_string());
    Ok(SyntheticData {
        frame,
        clean_target: clean,
    })
}

pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<TimeSeriesFrame> {
    Ok(generate_synthetic_data(spec, seed)?.frame)
}
