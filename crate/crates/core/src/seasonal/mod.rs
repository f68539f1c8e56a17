//! Additive three-scale seasonal adjustment.
//!
//! A channel is split as
//! `x(t) = yearly_smoothed[doy] + weekly[dow] + daily[hod] + residual[t]`
//! where the yearly profile is a LOESS-smoothed day-of-year average of the
//! daily means, the weekly profile is the weekday average of the daily
//! means, and the daily profile is the hour-of-day average of what remains
//! after both day-scale profiles are removed from the hourly data.

mod loess;

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TimeSeriesFrame;

pub use loess::{loess_smooth, Loess, LoessConfig};

pub const YEAR_SLOTS: usize = 366;
const MIN_DAYS: usize = 730;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeConfig {
    pub loess: LoessConfig,
    /// Days copied from each end of the year onto the other before smoothing.
    pub padding_days: usize,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self {
            loess: LoessConfig::default(),
            padding_days: 30,
        }
    }
}

/// The additive components of one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalComponents {
    pub channel: String,
    /// Day-of-year averages of the daily means (slot = ordinal day − 1).
    /// Slots without data hold the smoothed value.
    pub yearly_raw: Vec<f64>,
    pub yearly_smoothed: Vec<f64>,
    /// Monday first.
    pub weekly: Vec<f64>,
    pub daily: Vec<f64>,
    pub residual: Vec<f64>,
}

fn year_slot(t: &NaiveDateTime) -> usize {
    t.ordinal0() as usize
}

fn weekday_slot(t: &NaiveDateTime) -> usize {
    t.weekday().num_days_from_monday() as usize
}

fn hour_slot(t: &NaiveDateTime) -> usize {
    t.hour() as usize
}

fn centered(v: &[f64]) -> Vec<f64> {
    let m = crate::stats::mean(v);
    v.iter().map(|x| x - m).collect()
}

impl SeasonalComponents {
    /// Sum of the three seasonal profiles at `t`.
    pub fn seasonal_at(&self, t: &NaiveDateTime) -> f64 {
        self.yearly_smoothed[year_slot(t)] + self.weekly[weekday_slot(t)] + self.daily[hour_slot(t)]
    }

    /// Removes the fitted seasonal profiles from new observations.
    pub fn deseasonalize(&self, values: &[f64], timestamps: &[NaiveDateTime]) -> Result<Vec<f64>> {
        check_len(values.len(), timestamps.len())?;
        Ok(values.iter().zip(timestamps).map(|(v, t)| v - self.seasonal_at(t)).collect())
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

/// Adds the seasonal profiles back onto (predicted) residuals.
pub fn reseasonalize(
    components: &SeasonalComponents,
    residuals: &[f64],
    timestamps: &[NaiveDateTime],
) -> Result<Vec<f64>> {
    check_len(residuals.len(), timestamps.len())?;
    Ok(residuals
        .iter()
        .zip(timestamps)
        .map(|(r, t)| r + components.seasonal_at(t))
        .collect())
}

fn daily_means(timestamps: &[NaiveDateTime], values: &[f64]) -> Vec<(NaiveDate, f64)> {
    let mut out: Vec<(NaiveDate, f64)> = Vec::new();
    let mut acc = (0.0, 0usize);
    for (i, (t, v)) in timestamps.iter().zip(values).enumerate() {
        acc.0 += v;
        acc.1 += 1;
        let last_of_day = timestamps.get(i + 1).is_none_or(|n| n.date() != t.date());
        if last_of_day {
            out.push((t.date(), acc.0 / acc.1 as f64));
            acc = (0.0, 0);
        }
    }
    out
}

/// Decomposes one channel. Requires at least two years (730 days) of data.
pub fn decompose(
    channel: &str,
    timestamps: &[NaiveDateTime],
    values: &[f64],
    cfg: &DecomposeConfig,
) -> Result<SeasonalComponents> {
    check_len(values.len(), timestamps.len())?;
    let days = daily_means(timestamps, values);
    if days.len() < MIN_DAYS {
        return Err(Error::SpanTooShort {
            days: days.len(),
            needed: MIN_DAYS,
        });
    }

    let mut year_sum = [0.0; YEAR_SLOTS];
    let mut year_n = [0usize; YEAR_SLOTS];
    let mut week_sum = [0.0; 7];
    let mut week_n = [0usize; 7];
    for (d, m) in &days {
        let y = d.ordinal0() as usize;
        year_sum[y] += m;
        year_n[y] += 1;
        let w = d.weekday().num_days_from_monday() as usize;
        week_sum[w] += m;
        week_n[w] += 1;
    }
    let raw: Vec<Option<f64>> = (0..YEAR_SLOTS)
        .map(|s| (year_n[s] > 0).then(|| year_sum[s] / year_n[s] as f64))
        .collect();

    let pad = cfg.padding_days.min(YEAR_SLOTS / 2);
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(YEAR_SLOTS + 2 * pad);
    for (s, v) in raw.iter().enumerate() {
        let Some(v) = *v else { continue };
        points.push((s as f64, v));
        if s >= YEAR_SLOTS - pad {
            points.push((s as f64 - YEAR_SLOTS as f64, v));
        }
        if s < pad {
            points.push((s as f64 + YEAR_SLOTS as f64, v));
        }
    }
    let smoother = Loess::fit(&points, cfg.loess)?;
    let mut yearly_smoothed = (0..YEAR_SLOTS)
        .map(|s| smoother.evaluate(s as f64))
        .collect::<Result<Vec<f64>>>()?;
    let yearly_raw: Vec<f64> = raw
        .iter()
        .zip(&yearly_smoothed)
        .map(|(r, s)| r.unwrap_or(*s))
        .collect();

    let week_raw: Vec<f64> = (0..7).map(|w| week_sum[w] / week_n[w] as f64).collect();
    let weekly = centered(&week_raw);

    let mut hour_sum = [0.0; 24];
    let mut hour_n = [0usize; 24];
    for (t, v) in timestamps.iter().zip(values) {
        let h = hour_slot(t);
        hour_sum[h] += v - yearly_smoothed[year_slot(t)] - weekly[weekday_slot(t)];
        hour_n[h] += 1;
    }
    let hour_raw: Vec<f64> = (0..24)
        .map(|h| if hour_n[h] > 0 { hour_sum[h] / hour_n[h] as f64 } else { 0.0 })
        .collect();
    let level = crate::stats::mean(&hour_raw);
    let daily: Vec<f64> = hour_raw.iter().map(|v| v - level).collect();
    yearly_smoothed.iter_mut().for_each(|v| *v += level);

    let mut comps = SeasonalComponents {
        channel: channel.to_string(),
        yearly_raw,
        yearly_smoothed,
        weekly,
        daily,
        residual: Vec::new(),
    };
    comps.residual = comps.deseasonalize(values, timestamps)?;
    Ok(comps)
}

/// Decomposes every channel of `frame` except those listed in `exempt`,
/// returning the residual frame and the components of each decomposed
/// channel. Exempt channels are copied through unchanged.
pub fn decompose_frame(
    frame: &TimeSeriesFrame,
    cfg: &DecomposeConfig,
    exempt: &[String],
) -> Result<(TimeSeriesFrame, Vec<SeasonalComponents>)> {
    let mut residual = frame.clone();
    let mut all = Vec::new();
    for ch in frame.channels() {
        if exempt.iter().any(|e| e == &ch.name) {
            continue;
        }
        let comps = decompose(&ch.name, frame.timestamps(), &ch.values, cfg)?;
        residual.set_channel(&ch.name, &ch.unit, comps.residual.clone())?;
        all.push(comps);
    }
    Ok((residual, all))
}
