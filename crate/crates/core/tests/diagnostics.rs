mod common;

use proptest::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use tailcast_core::diagnostics::{
    acf, classify_dependence, compare_tails, dfa, empirical_ccdf, fit_lognormal, fit_powerlaw, DfaConfig, DfaRegime,
    Dependence, TailModel,
};
use tailcast_core::Error;

/// Stationary Gaussian series with spectrum `S(f) ∝ |f|^{-(1-gamma)}`,
/// whose ACF decays like `r^{-gamma}`.
fn fourier_long_range(n: usize, gamma: f64, seed: u64) -> Vec<f64> {
    let noise = common::white_noise(n, seed);
    let mut buf: Vec<Complex<f64>> = noise.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 / n as f64;
        *c *= if f == 0.0 { 0.0 } else { f.powf(-(1.0 - gamma) / 2.0) };
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

#[test]
fn acf_basics() {
    let x = common::white_noise(100_000, 1);
    let a = acf(&x, 50).unwrap();
    assert_eq!(a.values[0], 1.0);
    assert!(a.values[1..].iter().all(|c| c.abs() < 0.02));
    assert!((a.confidence_band - 1.96 / (100_000f64).sqrt()).abs() < 1e-15);
    assert!(matches!(acf(&[2.0; 100], 10), Err(Error::ZeroVariance)));
}

#[test]
fn acf_of_ar1_matches_geometric_decay() {
    let x = common::ar_series(&[0.8], 0.0, 100_000, 2);
    let a = acf(&x, 200).unwrap();
    assert!((a.values[5] - 0.8f64.powi(5)).abs() < 0.02, "{}", a.values[5]);
    assert_eq!(a.classification, Some(Dependence::ShortRange));
    assert_eq!(classify_dependence(&a).unwrap(), Dependence::ShortRange);
}

#[test]
fn fourier_series_is_long_range() {
    let x = fourier_long_range(1 << 17, 0.4, 3);
    let a = acf(&x, 300).unwrap();
    assert_eq!(classify_dependence(&a).unwrap(), Dependence::LongRange);
}

#[test]
fn white_noise_not_long_range() {
    let a = acf(&common::white_noise(50_000, 4), 150).unwrap();
    match classify_dependence(&a) {
        Ok(d) => assert_ne!(d, Dependence::LongRange),
        Err(e) => assert!(matches!(e, Error::TooFewPositiveLags(_))),
    }
}

#[test]
fn dfa_constant_has_zero_fluctuation() {
    let r = dfa(&[4.0; 4096], &DfaConfig::default()).unwrap();
    assert!(r.fluctuations.iter().all(|v| *v == 0.0));
}

#[test]
fn dfa_white_noise_and_walk() {
    let noise = common::white_noise(1 << 16, 5);
    let r = dfa(&noise, &DfaConfig::default()).unwrap();
    assert!((r.h - 0.5).abs() < 0.05, "white noise h {}", r.h);
    let expected = if r.h <= 0.5 { DfaRegime::ShortRange } else { DfaRegime::LongRange };
    assert_eq!(r.regime, Some(expected));
    let walk = common::cumsum(&noise);
    let r = dfa(&walk, &DfaConfig::default()).unwrap();
    assert!((r.h - 1.5).abs() < 0.1, "walk h {}", r.h);
    assert_eq!(r.regime, Some(DfaRegime::NonStationary));
    assert_eq!(r.segment_sizes.len(), 16);
    assert_eq!(r.segment_sizes[0], 16);
    assert_eq!(*r.segment_sizes.last().unwrap(), (1 << 16) / 4);
}

#[test]
fn dfa_long_range_exponent() {
    // ACF ~ r^-0.4 corresponds to h = 1 - 0.4/2 = 0.8.
    let x = fourier_long_range(1 << 16, 0.4, 6);
    let r = dfa(&x, &DfaConfig::default()).unwrap();
    assert!((r.h - 0.8).abs() < 0.08, "h {}", r.h);
    assert_eq!(r.regime, Some(DfaRegime::LongRange));
    assert!((r.xi - 2.0 * (1.0 - r.h)).abs() < 1e-12);
}

#[test]
fn dfa_too_short() {
    let cfg = DfaConfig {
        sizes: Some(vec![100]),
        ..DfaConfig::default()
    };
    assert!(matches!(dfa(&[1.0; 300], &cfg), Err(Error::SeriesTooShort { .. })));
}

#[test]
fn ccdf_examples() {
    let x: Vec<f64> = [1.0, 2.0, 3.0, 4.0].repeat(3);
    let c = empirical_ccdf(&x).unwrap();
    assert_eq!(c[0], (1.0, 0.75));
    assert_eq!(c[3], (4.0, 0.0));
    let c = empirical_ccdf(&[5.0; 12]).unwrap();
    assert_eq!(c, vec![(5.0, 0.0)]);
    assert!(matches!(empirical_ccdf(&[-1.0; 20]), Err(Error::NoPositiveData)));
}

#[test]
fn pareto_ccdf_slope() {
    let x = common::pareto(10_000, 2.5, 1.0, 7);
    let c = empirical_ccdf(&x).unwrap();
    // Regress log F̄ on log x over the upper part of the sample, where F̄ ≥ 1e-3.
    let pts: Vec<(f64, f64)> = c
        .iter()
        .filter(|(_, f)| *f >= 1e-3)
        .map(|(x, f)| (x.ln(), f.ln()))
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 2.5).abs() < 0.15, "slope {slope}");
}

#[test]
fn powerlaw_fit() {
    let x = common::pareto(10_000, 2.5, 1.0, 8);
    let fixed = fit_powerlaw(&x, Some(1.0)).unwrap();
    assert!((fixed.alpha - 2.5).abs() < 0.1, "{}", fixed.alpha);
    let searched = fit_powerlaw(&x, None).unwrap();
    assert!((searched.alpha - 2.5).abs() < 0.15);
    assert!(searched.n_tail >= 50);
    assert!(matches!(fit_powerlaw(&[3.0; 100], Some(3.0)), Err(Error::TailTooSmall { .. })));
}

#[test]
fn lognormal_fit() {
    let x = common::lognormal(10_000, 0.0, 1.0, 9);
    let f = fit_lognormal(&x).unwrap();
    assert!(f.mu.abs() < 0.05 && (f.sigma - 1.0).abs() < 0.05);
    let emp = x.iter().filter(|v| **v > f.mu.exp()).count() as f64 / x.len() as f64;
    assert!((f.ccdf(f.mu.exp()) - 0.5).abs() < 1e-12);
    assert!((emp - 0.5).abs() < 0.02);
    let flat = fit_lognormal(&[std::f64::consts::E; 20]).unwrap();
    assert!((flat.mu - 1.0).abs() < 1e-12 && flat.sigma == 1e-8);
    assert!(matches!(fit_lognormal(&[1.0, 0.0]), Err(Error::NonPositiveValue(_))));
}

#[test]
fn tail_comparison_follows_generator() {
    for seed in 0..5 {
        let ln = compare_tails(&common::lognormal(10_000, 0.0, 1.0, 100 + seed)).unwrap();
        let pl = compare_tails(&common::pareto(10_000, 2.5, 1.0, 200 + seed)).unwrap();
        assert_eq!(ln.preferred, TailModel::Lognormal);
        assert_eq!(pl.preferred, TailModel::Powerlaw);
        assert!(ln.loglik_ratio > 0.0 && pl.loglik_ratio < 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn acf_shift_invariant(seed in 0u64..10_000, shift in -1e3f64..1e3) {
        let x = common::ar_series(&[0.5], 0.0, 2000, seed);
        let y: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let (a, b) = (acf(&x, 30).unwrap(), acf(&y, 30).unwrap());
        for (p, q) in a.values.iter().zip(&b.values) {
            prop_assert!((p - q).abs() < 1e-9);
            prop_assert!(p.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn dfa_scale_invariant(seed in 0u64..10_000, k in 0.01f64..100.0) {
        let x = common::white_noise(4096, seed);
        let y: Vec<f64> = x.iter().map(|v| v * k).collect();
        let (a, b) = (dfa(&x, &DfaConfig::default()).unwrap(), dfa(&y, &DfaConfig::default()).unwrap());
        prop_assert!((a.h - b.h).abs() < 1e-6);
        prop_assert!(a.fluctuations.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn ccdf_monotone(seed in 0u64..10_000) {
        let c = empirical_ccdf(&common::lognormal(300, 0.0, 1.5, seed)).unwrap();
        prop_assert!(c.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 >= w[1].1));
    }

    #[test]
    fn powerlaw_scale_invariant(seed in 0u64..10_000, k in 0.1f64..50.0) {
        let x = common::pareto(2000, 2.0, 1.0, seed);
        let y: Vec<f64> = x.iter().map(|v| v * k).collect();
        let (a, b) = (fit_powerlaw(&x, Some(1.5)).unwrap(), fit_powerlaw(&y, Some(1.5 * k)).unwrap());
        prop_assert!((a.alpha - b.alpha).abs() < 1e-9 * a.alpha);
    }
}
