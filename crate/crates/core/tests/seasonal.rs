mod common;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use proptest::prelude::*;
use rand_distr::{Distribution, Normal};
use tailcast_core::seasonal::{decompose, loess_smooth, reseasonalize, DecomposeConfig, LoessConfig, YEAR_SLOTS};

fn hours(start: NaiveDateTime, n: usize) -> Vec<NaiveDateTime> {
    (0..n).map(|i| start + Duration::hours(i as i64)).collect()
}

fn three_years() -> Vec<NaiveDateTime> {
    hours(common::start(), 24 * (365 * 3 + 1))
}

#[test]
fn constant_series() {
    let ts = three_years();
    let c = decompose("x", &ts, &vec![6.5; ts.len()], &DecomposeConfig::default()).unwrap();
    assert!(c.yearly_smoothed.iter().all(|v| (v - 6.5).abs() < 1e-9));
    assert!(c.weekly.iter().chain(&c.daily).chain(&c.residual).all(|v| v.abs() < 1e-9));
}

#[test]
fn weekday_pattern_recovered() {
    let p = [3.0, -1.0, 0.5, -2.0, 1.5, -0.5, -1.5];
    let ts = three_years();
    let x: Vec<f64> = ts
        .iter()
        .map(|t| 10.0 + p[t.weekday().num_days_from_monday() as usize])
        .collect();
    let c = decompose("x", &ts, &x, &DecomposeConfig::default()).unwrap();
    for (w, e) in c.weekly.iter().zip(&p) {
        assert!((w - e).abs() < 1e-6, "{w} vs {e}");
    }
    let worst = c.yearly_smoothed.iter().map(|v| (v - 10.0).abs()).fold(0.0, f64::max);
    // Weekday offsets alias into the three day-of-year samples per slot.
    assert!(worst < 0.1, "yearly deviation {worst}");
}

#[test]
fn daily_sinusoid_amplitude() {
    let ts = three_years();
    let amp = 4.0;
    let x: Vec<f64> = ts
        .iter()
        .map(|t| 20.0 + amp * (2.0 * std::f64::consts::PI * t.hour() as f64 / 24.0).sin())
        .collect();
    let c = decompose("x", &ts, &x, &DecomposeConfig::default()).unwrap();
    for (h, v) in c.daily.iter().enumerate() {
        let expect = amp * (2.0 * std::f64::consts::PI * h as f64 / 24.0).sin();
        assert!((v - expect).abs() < 1e-9);
    }
}

#[test]
fn leap_days_always_resolve() {
    let ts = hours(NaiveDate::from_ymd_opt(2019, 12, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(), 24 * 800);
    let x: Vec<f64> = (0..ts.len()).map(|i| (i as f64 * 0.01).sin()).collect();
    let c = decompose("x", &ts, &x, &DecomposeConfig::default()).unwrap();
    assert_eq!(c.yearly_smoothed.len(), YEAR_SLOTS);
    assert!(c.yearly_smoothed.iter().all(|v| v.is_finite()));
    let leap = NaiveDate::from_ymd_opt(2024, 2, 29).unwrap().and_hms_opt(5, 0, 0).unwrap();
    let dec31 = NaiveDate::from_ymd_opt(2028, 12, 31).unwrap().and_hms_opt(23, 0, 0).unwrap();
    assert!(c.seasonal_at(&leap).is_finite());
    assert!(c.seasonal_at(&dec31).is_finite());
}

/// Standard deviation of a local quadratic tricube fit at an interior point
/// with `q` equally spaced neighbours and unit noise: the norm of the
/// equivalent-kernel row.
fn equivalent_kernel_norm(q: usize) -> f64 {
    let half = (q - 1) as f64 / 2.0;
    let bw = half * 1.001;
    let xs: Vec<f64> = (0..q).map(|i| i as f64 - half).collect();
    let w: Vec<f64> = xs.iter().map(|x| (1.0 - (x.abs() / bw).powi(3)).powi(3)).collect();
    let mut m = nalgebra::Matrix3::zeros();
    let mut rows = Vec::new();
    for (x, wi) in xs.iter().zip(&w) {
        let b = nalgebra::Vector3::new(1.0, *x, x * x);
        m += *wi * b * b.transpose();
        rows.push(b * *wi);
    }
    let inv = m.try_inverse().unwrap();
    rows.iter().map(|r| (inv * r)[0].powi(2)).sum::<f64>().sqrt()
}

#[test]
fn noisy_sine_within_kernel_bound() {
    let sigma = 0.5;
    let se = sigma * equivalent_kernel_norm(55);
    let clean = |x: f64| (2.0 * std::f64::consts::PI * x / 366.0).sin();
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut r = common::rng(7);
    let pts: Vec<(f64, f64)> = (0..366).map(|i| (i as f64, clean(i as f64) + noise.sample(&mut r))).collect();
    let cfg = LoessConfig {
        span: 0.15,
        degree: 2,
        iterations: 1,
    };
    let out = loess_smooth(&pts, cfg).unwrap();
    let max_dev = (30..336).map(|i| (out[i] - clean(i as f64)).abs()).fold(0.0, f64::max);
    // Sampling error alone puts the interior maximum near 2-3 standard errors.
    assert!(max_dev < 4.0 * se, "max deviation {max_dev}, standard error {se}");
}

#[test]
fn line_reproduced_by_degree_one() {
    let pts: Vec<(f64, f64)> = (0..80).map(|i| (i as f64 * 1.3, 0.25 * i as f64 * 1.3 - 7.0)).collect();
    for span in [0.05, 0.4, 1.0] {
        let cfg = LoessConfig {
            span,
            degree: 1,
            iterations: 0,
        };
        for (s, p) in loess_smooth(&pts, cfg).unwrap().iter().zip(&pts) {
            assert!((s - p.1).abs() < 1e-9);
        }
    }
}

fn noisy_seasonal(n_days: usize, seed: u64) -> (Vec<NaiveDateTime>, Vec<f64>) {
    let ts = hours(common::start(), 24 * n_days);
    let e = common::white_noise(ts.len(), seed);
    let x = ts
        .iter()
        .zip(&e)
        .enumerate()
        .map(|(i, (t, n))| {
            let tf = i as f64;
            5.0 * (2.0 * std::f64::consts::PI * tf / 8766.0).sin()
                + (t.weekday().num_days_from_monday() as f64 - 3.0) * 0.4
                + 2.0 * (2.0 * std::f64::consts::PI * tf / 24.0).cos()
                + n
        })
        .collect();
    (ts, x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn round_trip_and_shift(seed in 0u64..1000, shift in -50.0f64..50.0) {
        let (ts, x) = noisy_seasonal(735, seed);
        let cfg = DecomposeConfig::default();
        let c = decompose("x", &ts, &x, &cfg).unwrap();
        let back = reseasonalize(&c, &c.residual, &ts).unwrap();
        for (a, b) in back.iter().zip(&x) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert!(common::mean(&c.weekly).abs() < 1e-9);
        prop_assert!(common::mean(&c.daily).abs() < 1e-9);

        let shifted: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let s = decompose("x", &ts, &shifted, &cfg).unwrap();
        for (a, b) in s.yearly_smoothed.iter().zip(&c.yearly_smoothed) {
            prop_assert!((a - b - shift).abs() < 1e-9);
        }
        for (a, b) in s.weekly.iter().zip(&c.weekly).chain(s.daily.iter().zip(&c.daily)).chain(s.residual.iter().zip(&c.residual)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
