//! Replicated MSE vs MCCR comparison on contaminated synthetic data.

use serde::{Deserialize, Serialize};
use tailcast_core::evaluation::{forecast_test_block, generate_synthetic_data, nmbf, rmse, train_hybrid, TrackedFrame};
use tailcast_core::neural::{LossKind, WindowSpec};

use crate::config::RunConfig;
use crate::pipeline::{prepare, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossScores {
    /// RMSE over test targets whose distance from the test mean is in the
    /// top decile.
    pub top_decile_rmse: f64,
    pub nmbf: f64,
    pub rmse: f64,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessTrial {
    pub replicate: u64,
    pub seed: u64,
    pub mse: LossScores,
    pub mccr: LossScores,
}

/// Generates the configured synthetic data for one replicate, trains the
/// hybrid model once per loss from the same initial weights, and scores
/// both against the uncontaminated target over the pooled horizons.
pub fn robustness_trial(cfg: &RunConfig, replicate: u64) -> Result<RobustnessTrial> {
    let seed = cfg.seed_for(&format!("robustness/{replicate}"));
    let data = generate_synthetic_data(&cfg.synthetic_spec(), seed)?;
    let p = prepare(cfg, data.frame)?;
    let tracked = TrackedFrame::new(&p.frame);
    let spec = WindowSpec::for_frame(&p.frame, cfg.window, cfg.horizon, &cfg.target)?;
    let mut options = tailcast_core::evaluation::EvalOptions::new(cfg.window);
    options.horizons = cfg.horizons.clone();
    options.stride = cfg.stride;
    options.target_offset = p.means.get(&cfg.target)?;
    options.seasonal = p.target_components.as_ref();
    options.truth = Some(&data.clean_target);

    let mut scores = Vec::new();
    for kind in [LossKind::Mse, LossKind::Mccr] {
        let loss = cfg.loss_spec(kind)?;
        let (model, report) = train_hybrid(
            &tracked,
            &p.plan,
            &spec,
            &cfg.hybrid_config(),
            &cfg.train_config(),
            &loss,
            seed.wrapping_add(1),
        )?;
        let per_h = forecast_test_block(&model, &p.plan, &p.frame, &cfg.target, &options)?;
        let (mut actual, mut predicted) = (Vec::new(), Vec::new());
        for f in per_h.values() {
            actual.extend_from_slice(&f.actual);
            predicted.extend_from_slice(&f.predicted);
        }
        let centre = actual.iter().sum::<f64>() / actual.len() as f64;
        let mut dist: Vec<f64> = actual.iter().map(|a| (a - centre).abs()).collect();
        dist.sort_by(f64::total_cmp);
        let cut = dist[(dist.len() * 9) / 10];
        let (top_a, top_p): (Vec<f64>, Vec<f64>) = actual
            .iter()
            .zip(&predicted)
            .filter(|(a, _)| (**a - centre).abs() >= cut)
            .map(|(a, p)| (*a, *p))
            .unzip();
        scores.push(LossScores {
            top_decile_rmse: rmse(&top_a, &top_p)?,
            nmbf: nmbf(&actual, &predicted)?,
            rmse: rmse(&actual, &predicted)?,
            epochs: report.epochs(),
        });
    }
    let mccr = scores.pop().expect("two losses");
    let mse = scores.pop().expect("two losses");
    Ok(RobustnessTrial {
        replicate,
        seed,
        mse,
        mccr,
    })
}
