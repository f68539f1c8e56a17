use serde::{Deserialize, Serialize};

use super::TimeSeriesFrame;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImputationConfig {
    /// Number of complete rows averaged per missing cell.
    pub k: usize,
}

impl Default for ImputationConfig {
    fn default() -> Self {
        Self { k: 5 }
    }
}

/// Fills missing cells from the `k` nearest complete rows.
///
/// Distance between a query row and a complete row is Euclidean over the
/// channels present in the query, each scaled by that channel's standard
/// deviation (channels with zero spread are ignored). Ties are broken by
/// row order. Every missing cell becomes the mean of its channel over the
/// selected neighbours; present cells are untouched.
pub fn impute_knn(frame: &TimeSeriesFrame, cfg: ImputationConfig) -> Result<TimeSeriesFrame> {
    if cfg.k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if frame.missing_count() == 0 {
        return Ok(frame.clone());
    }
    let n_ch = frame.channels().len();
    let rows = frame.len();
    let complete: Vec<usize> = (0..rows)
        .filter(|&r| (0..n_ch).all(|c| !frame.value(r, c).is_nan()))
        .collect();
    if complete.len() < cfg.k {
        return Err(Error::InsufficientNeighbors {
            needed: cfg.k,
            found: complete.len(),
        });
    }

    let inv_scale: Vec<f64> = frame
        .channels()
        .iter()
        .map(|ch| {
            let present: Vec<f64> = ch.values.iter().copied().filter(|v| !v.is_nan()).collect();
            let sd = crate::stats::variance(&present).sqrt();
            if sd > 0.0 && sd.is_finite() {
                1.0 / sd
            } else {
                0.0
            }
        })
        .collect();

    let mut out = frame.clone();
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(complete.len());
    for r in 0..rows {
        let missing: Vec<usize> = (0..n_ch).filter(|&c| frame.value(r, c).is_nan()).collect();
        if missing.is_empty() {
            continue;
        }
        dist.clear();
        for &cr in &complete {
            let mut d2 = 0.0;
            for c in 0..n_ch {
                let q = frame.value(r, c);
                if !q.is_nan() {
                    d2 += ((q - frame.value(cr, c)) * inv_scale[c]).powi(2);
                }
            }
            dist.push((d2, cr));
        }
        dist.select_nth_unstable_by(cfg.k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let neighbours = &mut dist[..cfg.k];
        neighbours.sort_by_key(|&(_, idx)| idx);
        for &c in &missing {
            let sum: f64 = neighbours.iter().map(|&(_, idx)| frame.value(idx, c)).sum();
            out.channels[c].values[r] = sum / cfg.k as f64;
        }
    }
    Ok(out)
}
