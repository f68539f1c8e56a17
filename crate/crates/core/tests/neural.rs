mod common;

use proptest::prelude::*;
use rand::Rng;
use tailcast_core::neural::{
    dataset_loss, load_checkpoint, mccr_gradient, mccr_loss, mse_gradient, mse_loss, save_checkpoint, time2vec_forward,
    train, Dataset, HybridConfig, HybridModel, LossSpec, Time2Vec, TrainConfig, WindowSpec,
};
use tailcast_core::{Error, Window};

fn spec(t: usize, h: usize, n: usize, target: usize) -> WindowSpec {
    let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
    WindowSpec::new(t, h, &names, &names[target]).unwrap()
}

fn small_config() -> HybridConfig {
    HybridConfig {
        hidden: vec![5, 4],
        leaky_slope: 0.01,
        t2v_k: 2,
    }
}

fn random_window(s: &WindowSpec, seed: u64) -> Window {
    let data = common::white_noise(s.input_size(), seed);
    Window::new(data, s.n_channels, s.target).unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    // The floor keeps round-off on near-zero derivatives from dominating.
    (a - b).abs() / a.abs().max(b.abs()).max(1e-4)
}

#[test]
fn mccr_examples() {
    assert_eq!(mccr_loss(&[1.0, 2.0], &[1.0, 2.0], 0.5).unwrap(), 0.0);
    assert!((mccr_loss(&[1.0], &[0.0], 1.0).unwrap() - 0.6321206).abs() < 1e-7);
    assert!(matches!(mccr_loss(&[1.0], &[0.0, 1.0], 1.0), Err(Error::LengthMismatch { .. })));
    assert!(matches!(mccr_gradient(&[1.0], &[0.0], -2.0), Err(Error::NonPositiveBeta(_))));
}

#[test]
fn loss_gradients_match_finite_differences() {
    let mut r = common::rng(1);
    let h = 1e-6;
    for _ in 0..20 {
        let n = r.random_range(1..8);
        let beta = r.random_range(0.3..5.0);
        let a: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let p: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let gm = mccr_gradient(&a, &p, beta).unwrap();
        let gs = mse_gradient(&a, &p).unwrap();
        for i in 0..n {
            let mut up = p.clone();
            let mut down = p.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (mccr_loss(&a, &up, beta).unwrap() - mccr_loss(&a, &down, beta).unwrap()) / (2.0 * h);
            assert!(rel_err(gm[i], fd) < 1e-5, "mccr {} vs {fd}", gm[i]);
            let fd = (mse_loss(&a, &up).unwrap() - mse_loss(&a, &down).unwrap()) / (2.0 * h);
            assert!(rel_err(gs[i], fd) < 1e-5, "mse {} vs {fd}", gs[i]);
        }
    }
}

#[test]
fn gradient_peaks_at_beta_over_root_two() {
    let beta = 1.5;
    let g = |e: f64| mccr_gradient(&[e], &[0.0], beta).unwrap()[0].abs();
    assert!(g(3.0 * beta) < g(beta / 2f64.sqrt()));
    let peak = beta / 2f64.sqrt();
    for e in [0.2, 0.5, 0.9, 1.1, 1.5, 3.0] {
        assert!(g(e * peak) <= g(peak));
    }
}

#[test]
fn time2vec_examples() {
    assert_eq!(time2vec_forward(3.0, &[2.0], &[-1.0]), vec![5.0]);
    let v = time2vec_forward(6.0, &[1.0, 2.0 * std::f64::consts::PI / 24.0], &[0.0, 0.0]);
    assert!((v[1] - 1.0).abs() < 1e-15);
    let t = Time2Vec::seeded(8, 48.0);
    assert_eq!(t.dim(), 9);
    for i in 1..=8 {
        let period = 2.0 * std::f64::consts::PI / t.omega[i];
        assert!((t.forward(5.5)[i] - t.forward(5.5 + period)[i]).abs() < 1e-9);
    }
}

#[test]
fn forward_head_examples() {
    let s = spec(6, 3, 2, 1);
    let w = random_window(&s, 2);
    let lags = w.target_series();

    let mut m = HybridModel::new(s.clone(), small_config(), 3).unwrap();
    m.zero_dense_net();
    let out = m.forward(&w).unwrap();
    for (j, o) in out.iter().enumerate() {
        let row = &m.ar_weights()[j * 6..(j + 1) * 6];
        let expect = m.ar_bias()[j] + row.iter().zip(&lags).map(|(a, b)| a * b).sum::<f64>();
        assert!((o - expect).abs() < 1e-12);
    }

    let mut m = HybridModel::new(s.clone(), small_config(), 4).unwrap();
    m.zero_ar_head();
    m.zero_dense_weights();
    m.ar_bias_mut().copy_from_slice(&[0.5, -1.0, 2.0]);
    m.output_bias_mut().copy_from_slice(&[1.0, 1.0, 1.0]);
    // Hidden biases stay, but the zeroed output weights block them.
    assert_eq!(m.forward(&w).unwrap(), vec![1.5, 0.0, 3.0]);

    let mut m = HybridModel::new(s.clone(), small_config(), 5).unwrap();
    m.zero_dense_net();
    m.ar_bias_mut().fill(0.0);
    let mut doubled = w.clone();
    for t in 0..6 {
        doubled.data_mut()[t * 2 + 1] *= 2.0;
    }
    let (a, b) = (m.forward(&w).unwrap(), m.forward(&doubled).unwrap());
    for (x, y) in a.iter().zip(&b) {
        assert!((2.0 * x - y).abs() < 1e-12);
    }
}

#[test]
fn heads_are_additive() {
    let s = spec(8, 4, 3, 0);
    let w = random_window(&s, 6);
    let full = HybridModel::new(s.clone(), small_config(), 7).unwrap();
    let (ar, dense) = full.forward_heads(&w).unwrap();
    let mut no_dense = full.clone();
    no_dense.zero_dense_net();
    let mut no_ar = full.clone();
    no_ar.zero_ar_head();
    assert_eq!(no_dense.forward(&w).unwrap(), ar);
    assert_eq!(no_ar.forward(&w).unwrap(), dense);
}

#[test]
fn shape_mismatch() {
    let s = spec(6, 3, 2, 1);
    let m = HybridModel::new(s, small_config(), 0).unwrap();
    let w = Window::new(vec![0.0; 14], 2, 1).unwrap();
    assert!(matches!(m.forward(&w), Err(Error::ShapeMismatch { .. })));
}

fn check_model_gradient(loss: LossSpec, seed: u64) {
    let mut r = common::rng(seed);
    let s = spec(6, 3, 2, r.random_range(0..2));
    let mut m = HybridModel::new(s.clone(), small_config(), seed).unwrap();
    // Move biases and time parameters off their initial values.
    for p in m.params_mut() {
        *p += r.random_range(-0.2..0.2);
    }
    let batch = 4;
    let inputs = common::white_noise(batch * s.input_size(), seed + 100);
    let targets: Vec<f64> = common::white_noise(batch * 3, seed + 200).iter().map(|v| 2.0 * v).collect();
    let (_, grad) = m.loss_and_gradient(&inputs, &targets, batch, &loss).unwrap();
    let h = 1e-5;
    for i in 0..m.n_params() {
        let orig = m.params()[i];
        m.params_mut()[i] = orig + h;
        let up = m.loss_and_gradient(&inputs, &targets, batch, &loss).unwrap().0;
        m.params_mut()[i] = orig - h;
        let down = m.loss_and_gradient(&inputs, &targets, batch, &loss).unwrap().0;
        m.params_mut()[i] = orig;
        let fd = (up - down) / (2.0 * h);
        assert!(rel_err(grad[i], fd) < 1e-5, "param {i}: analytic {} vs numeric {fd}", grad[i]);
    }
}

#[test]
fn model_gradients_match_finite_differences() {
    for seed in 0..10 {
        check_model_gradient(LossSpec::mse(), seed);
        check_model_gradient(LossSpec::mccr(1.5).unwrap(), 50 + seed);
    }
}

#[test]
fn ar_head_translation() {
    let s = spec(6, 3, 2, 0);
    let m = HybridModel::new(s.clone(), small_config(), 9).unwrap();
    let w = random_window(&s, 10);
    let c = 3.25;
    let mut shifted = w.clone();
    for t in 0..6 {
        shifted.data_mut()[t * 2] += c;
    }
    let (a, _) = m.forward_heads(&w).unwrap();
    let (b, _) = m.forward_heads(&shifted).unwrap();
    for j in 0..3 {
        let row_sum: f64 = m.ar_weights()[j * 6..(j + 1) * 6].iter().sum();
        assert!((b[j] - a[j] - c * row_sum).abs() < 1e-12);
    }
}

#[test]
fn mccr_bounds_outlier_influence() {
    let s = spec(6, 3, 1, 0);
    let m = HybridModel::new(s.clone(), small_config(), 11).unwrap();
    let batch = 16;
    let inputs = common::white_noise(batch * 6, 12);
    let base = common::white_noise(batch * 3, 13);
    let sigma = common::variance(&base).sqrt();
    let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mccr = LossSpec::mccr(1.0).unwrap();
    let mut last_ratio = f64::INFINITY;
    let mut last_mse = 0.0;
    for k in [10.0, 20.0, 40.0, 80.0] {
        let mut targets = base.clone();
        targets[5] = k * sigma;
        let (_, g_mccr) = m.loss_and_gradient(&inputs, &targets, batch, &mccr).unwrap();
        let (_, g_mse) = m.loss_and_gradient(&inputs, &targets, batch, &LossSpec::mse()).unwrap();
        let ratio = norm(&g_mccr) / norm(&g_mse);
        assert!(ratio < last_ratio, "ratio {ratio} after {last_ratio}");
        assert!(norm(&g_mse) > last_mse);
        last_ratio = ratio;
        last_mse = norm(&g_mse);
    }
}

/// Target channel is the covariate delayed by the horizon, so every future
/// target value is one of the window's covariate values.
fn realizable(n_samples: usize, seed: u64) -> Dataset {
    let s = spec(8, 2, 2, 1);
    let x = common::white_noise(n_samples + 10, seed);
    let mut d = Dataset::new(s);
    for i in 0..n_samples {
        let mut window = Vec::new();
        for t in 0..8 {
            let row = i + 2 + t;
            window.push(x[row]);
            window.push(3.0 * x[row - 2]);
        }
        let target = [3.0 * x[i + 8], 3.0 * x[i + 9]];
        d.push(&window, &target).unwrap();
    }
    d
}

#[test]
fn realizable_linear_target_is_learned() {
    let data = realizable(2048, 14);
    let mut m = HybridModel::new(data.spec().clone(), HybridConfig::default(), 15).unwrap();
    let cfg = TrainConfig {
        learning_rate: 5e-4,
        l2: 0.0,
        ..TrainConfig::default()
    };
    let report = train(&mut m, &data, None, &LossSpec::mse(), &cfg, 16).unwrap();
    assert!(report.epochs() <= 500);
    let rmse = dataset_loss(&m, &data, &LossSpec::mse()).unwrap().sqrt();
    let std = common::variance(data.targets()).sqrt();
    assert!(rmse < 0.01 * std, "rmse {rmse} vs target std {std}");
}

#[test]
fn large_beta_matches_mse_training() {
    let data = realizable(256, 17);
    let cfg = TrainConfig {
        max_epochs: 30,
        ..TrainConfig::default()
    };
    let base = HybridModel::new(data.spec().clone(), HybridConfig::default(), 18).unwrap();
    let (mut a, mut b) = (base.clone(), base);
    train(&mut a, &data, None, &LossSpec::mse(), &cfg, 19).unwrap();
    train(&mut b, &data, None, &LossSpec::mccr(100.0).unwrap(), &cfg, 19).unwrap();
    let diff: f64 = a.params().iter().zip(b.params()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = a.params().iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(diff / norm < 1e-2, "relative difference {}", diff / norm);
}

#[test]
fn training_is_deterministic() {
    let data = realizable(128, 20);
    let cfg = TrainConfig {
        max_epochs: 5,
        ..TrainConfig::default()
    };
    let run = || {
        let mut m = HybridModel::new(data.spec().clone(), small_config(), 21).unwrap();
        let r = train(&mut m, &data, Some(&data), &LossSpec::mccr(2.0).unwrap(), &cfg, 22).unwrap();
        (r, m.params().to_vec())
    };
    assert_eq!(run(), run());
}

#[test]
fn checkpoint_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(6, 3, 2, 1);
    let m = HybridModel::new(s.clone(), small_config(), 23).unwrap();
    let loss = LossSpec::mccr(4.1).unwrap();
    let (json, bin) = save_checkpoint(&m, &loss, &dir.path().join("model")).unwrap();
    let bytes = std::fs::read(&bin).unwrap();
    assert_eq!(bytes.len(), 8 * m.n_params());
    assert_eq!(f64::from_le_bytes(bytes[..8].try_into().unwrap()), m.ar_weights()[0]);
    let (back, back_loss) = load_checkpoint(&json).unwrap();
    assert_eq!(back, m);
    assert_eq!(back_loss, loss);
    let w = random_window(&s, 24);
    assert_eq!(back.forward(&w).unwrap(), m.forward(&w).unwrap());

    let (json, _) = save_checkpoint(&m, &LossSpec::mse(), &dir.path().join("mse")).unwrap();
    assert_eq!(load_checkpoint(&json).unwrap().1, LossSpec::mse());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn large_beta_close_to_mse(errs in prop::collection::vec(-1.0f64..1.0, 1..20)) {
        let zero = vec![0.0; errs.len()];
        let mse = mse_loss(&errs, &zero).unwrap();
        let mccr = mccr_loss(&errs, &zero, 100.0).unwrap();
        prop_assert!((mccr - mse).abs() <= 1e-4 * mse);
    }

    #[test]
    fn mccr_bounded(errs in prop::collection::vec(-1e6f64..1e6, 1..20), beta in 0.01f64..100.0) {
        let zero = vec![0.0; errs.len()];
        let l = mccr_loss(&errs, &zero, beta).unwrap();
        prop_assert!(l >= 0.0 && l <= beta * beta * (1.0 + 1e-12));
        let mse = mse_loss(&errs, &zero).unwrap();
        let bound = errs.iter().map(|e| e.powi(4)).sum::<f64>() / (2.0 * beta * beta) / errs.len() as f64;
        prop_assert!(mse - l <= bound * (1.0 + 1e-9) + 1e-12);
    }
}
