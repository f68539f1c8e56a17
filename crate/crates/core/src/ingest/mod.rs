//! Observation ingestion: hourly multivariate frames, CSV I/O, kNN
//! imputation, compass encoding and mean-centering.

mod csv_io;
mod impute;
mod wind;

use std::collections::BTreeMap;
use std::ops::Range;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csv_io::{
    format_real, parse_csv, parse_csv_reader, write_csv, write_csv_writer, ChannelKind, ChannelSpec, ParseOptions,
};
pub use impute::{impute_knn, ImputationConfig};
pub use wind::{encode_wind_direction, COMPASS_POINTS};

/// One named, unit-tagged column of a [`TimeSeriesFrame`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub unit: String,
    /// One value per timestamp; `NaN` marks a missing observation.
    pub values: Vec<f64>,
}

/// Timestamped multivariate hourly series.
///
/// Timestamps are strictly increasing with a constant one-hour step and
/// every channel has exactly one value per timestamp. Missing values are
/// `NaN` until [`impute_knn`] has been applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesFrame {
    timestamps: Vec<NaiveDateTime>,
    channels: Vec<Channel>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

impl TimeSeriesFrame {
    pub fn new(timestamps: Vec<NaiveDateTime>, channels: Vec<Channel>) -> Result<Self> {
        for (row, pair) in timestamps.windows(2).enumerate() {
            let step = pair[1] - pair[0];
            if step <= chrono::Duration::zero() {
                return Err(Error::NonMonotonicTime { row: row + 1 });
            }
            if step != chrono::Duration::hours(1) {
                return Err(Error::NotHourly { row: row + 1 });
            }
        }
        for ch in &channels {
            if ch.values.len() != timestamps.len() {
                return Err(Error::LengthMismatch {
                    left: timestamps.len(),
                    right: ch.values.len(),
                });
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for ch in &channels {
            if !seen.insert(ch.name.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate channel '{}'", ch.name)));
            }
        }
        Ok(Self {
            timestamps,
            channels,
            metadata: BTreeMap::new(),
        })
    }

    /// Builds a frame of `len` consecutive hours starting at `start`.
    pub fn hourly(start: NaiveDateTime, len: usize, channels: Vec<Channel>) -> Result<Self> {
        let timestamps = (0..len)
            .map(|i| start + chrono::Duration::hours(i as i64))
            .collect();
        Self::new(timestamps, channels)
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel_names(&self) -> Vec<&str> {
        self.channels.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn channel_index(&self, name: &str) -> Result<usize> {
        self.channels
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownChannel(name.to_string()))
    }

    pub fn channel(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.channels[self.channel_index(name)?].values)
    }

    pub fn unit(&self, name: &str) -> Result<&str> {
        Ok(&self.channels[self.channel_index(name)?].unit)
    }

    /// Replaces the values of an existing channel, or appends a new one.
    pub fn set_channel(&mut self, name: &str, unit: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: values.len(),
            });
        }
        match self.channels.iter_mut().find(|c| c.name == name) {
            Some(ch) => {
                ch.values = values;
                ch.unit = unit.to_string();
            }
            None => self.channels.push(Channel {
                name: name.to_string(),
                unit: unit.to_string(),
                values,
            }),
        }
        Ok(())
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn set_metadata(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.insert(key.into(), value.into());
    }

    pub fn missing_count(&self) -> usize {
        self.channels
            .iter()
            .map(|c| c.values.iter().filter(|v| v.is_nan()).count())
            .sum()
    }

    /// Row-range view as a new frame.
    pub fn slice(&self, rows: Range<usize>) -> Self {
        Self {
            timestamps: self.timestamps[rows.clone()].to_vec(),
            channels: self
                .channels
                .iter()
                .map(|c| Channel {
                    name: c.name.clone(),
                    unit: c.unit.clone(),
                    values: c.values[rows.clone()].to_vec(),
                })
                .collect(),
            metadata: self.metadata.clone(),
        }
    }

    /// Value of channel `col` at row `row`.
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.channels[col].values[row]
    }
}

/// Per-channel means used to center a frame and to invert the centering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMeans {
    pub means: Vec<(String, f64)>,
}

impl ChannelMeans {
    /// Means over the given rows only (normally the training blocks).
    pub fn from_rows(frame: &TimeSeriesFrame, rows: &[Range<usize>]) -> Self {
        let means = frame
            .channels()
            .iter()
            .map(|c| {
                let (sum, n) = rows
                    .iter()
                    .flat_map(|r| c.values[r.clone()].iter())
                    .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                let m = if n == 0 { 0.0 } else { sum / n as f64 };
                (c.name.clone(), m)
            })
            .collect();
        Self { means }
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.means
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| *m)
            .ok_or_else(|| Error::UnknownChannel(name.to_string()))
    }

    /// Subtracts the stored means; channels without a stored mean are left alone.
    pub fn apply(&self, frame: &TimeSeriesFrame) -> TimeSeriesFrame {
        self.shift(frame, -1.0)
    }

    pub fn invert(&self, frame: &TimeSeriesFrame) -> TimeSeriesFrame {
        self.shift(frame, 1.0)
    }

    fn shift(&self, frame: &TimeSeriesFrame, sign: f64) -> TimeSeriesFrame {
        let mut out = frame.clone();
        for ch in &mut out.channels {
            if let Ok(m) = self.get(&ch.name) {
                ch.values.iter_mut().for_each(|v| *v += sign * m);
            }
        }
        out
    }
}

/// Subtracts each channel's mean over the whole frame. No scaling by the
/// standard deviation is applied.
pub fn center(frame: &TimeSeriesFrame) -> (TimeSeriesFrame, ChannelMeans) {
    let means = ChannelMeans::from_rows(frame, &[0..frame.len()]);
    (means.apply(frame), means)
}

#[cfg(test)]
pub(crate) fn test_start() -> NaiveDateTime {
    chrono::NaiveDate::from_ymd_opt(2019, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
}
