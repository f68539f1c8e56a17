use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::{encode_wind_direction, Channel, TimeSeriesFrame};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    #[default]
    Numeric,
    /// 16-point compass labels, expanded into `<name>_sin` and `<name>_cos`.
    Compass,
}

/// One expected input column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub name: String,
    pub unit: String,
    #[serde(default)]
    pub kind: ChannelKind,
}

impl ChannelSpec {
    pub fn numeric(name: &str, unit: &str) -> Self {
        Self {
            name: name.to_string(),
            unit: unit.to_string(),
            kind: ChannelKind::Numeric,
        }
    }

    pub fn compass(name: &str) -> Self {
        Self {
            name: name.to_string(),
            unit: String::new(),
            kind: ChannelKind::Compass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Longest run of absent hourly rows that is filled with missing
    /// markers; longer gaps are rejected.
    pub max_gap_hours: i64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { max_gap_hours: 72 }
    }
}

const TIMESTAMP_FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
];

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| DateTime::parse_from_rfc3339(s).ok().map(|d| d.naive_local()))
}

pub fn parse_csv(path: impl AsRef<Path>, schema: &[ChannelSpec], opts: ParseOptions) -> Result<TimeSeriesFrame> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv_reader(file, schema, opts)
}

/// Parses the CSV dialect: header row, ISO-8601 timestamps in the first
/// column, decimal-point reals, empty cell = missing.
pub fn parse_csv_reader<R: Read>(reader: R, schema: &[ChannelSpec], opts: ParseOptions) -> Result<TimeSeriesFrame> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let columns: Vec<usize> = schema
        .iter()
        .map(|spec| {
            headers
                .iter()
                .skip(1)
                .position(|h| h == spec.name)
                .map(|i| i + 1)
                .ok_or_else(|| Error::MissingColumn(spec.name.clone()))
        })
        .collect::<Result<_>>()?;

    let width: usize = schema
        .iter()
        .map(|s| match s.kind {
            ChannelKind::Numeric => 1,
            ChannelKind::Compass => 2,
        })
        .sum();
    let mut timestamps: Vec<NaiveDateTime> = Vec::new();
    let mut data: Vec<Vec<f64>> = vec![Vec::new(); width];

    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let raw_ts = record.get(0).unwrap_or("");
        let ts = parse_timestamp(raw_ts).ok_or_else(|| Error::InvalidTimestamp {
            row,
            value: raw_ts.to_string(),
        })?;
        if let Some(&prev) = timestamps.last() {
            let step = ts - prev;
            if step <= chrono::Duration::zero() {
                return Err(Error::NonMonotonicTime { row });
            }
            if step.num_seconds() % 3600 != 0 {
                return Err(Error::NotHourly { row });
            }
            let absent = step.num_hours() - 1;
            if absent > opts.max_gap_hours {
                return Err(Error::GapTooLarge {
                    row,
                    hours: absent,
                    limit: opts.max_gap_hours,
                });
            }
            for h in 1..=absent {
                timestamps.push(prev + chrono::Duration::hours(h));
                data.iter_mut().for_each(|col| col.push(f64::NAN));
            }
        }
        timestamps.push(ts);
        let mut out = 0;
        for (spec, &col) in schema.iter().zip(&columns) {
            let cell = record.get(col).unwrap_or("");
            match spec.kind {
                ChannelKind::Numeric => {
                    data[out].push(cell.parse::<f64>().ok().filter(|v| v.is_finite()).unwrap_or(f64::NAN));
                    out += 1;
                }
                ChannelKind::Compass => {
                    let (s, c) = encode_wind_direction(cell).unwrap_or((f64::NAN, f64::NAN));
                    data[out].push(s);
                    data[out + 1].push(c);
                    out += 2;
                }
            }
        }
    }

    let mut values = data.into_iter();
    let mut channels = Vec::with_capacity(width);
    for spec in schema {
        match spec.kind {
            ChannelKind::Numeric => channels.push(Channel {
                name: spec.name.clone(),
                unit: spec.unit.clone(),
                values: values.next().unwrap_or_default(),
            }),
            ChannelKind::Compass => {
                for suffix in ["sin", "cos"] {
                    channels.push(Channel {
                        name: format!("{}_{}", spec.name, suffix),
                        unit: String::new(),
                        values: values.next().unwrap_or_default(),
                    });
                }
            }
        }
    }
    TimeSeriesFrame::new(timestamps, channels)
}

/// Formats a real with at most 9 significant digits; `NaN` becomes an
/// empty cell.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        return String::new();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse().unwrap_or(v);
    format!("{rounded}")
}

pub fn write_csv(frame: &TimeSeriesFrame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_writer(frame, file)
}

pub fn write_csv_writer<W: Write>(frame: &TimeSeriesFrame, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["timestamp".to_string()];
    header.extend(frame.channels().iter().map(|c| c.name.clone()));
    wtr.write_record(&header)?;
    for (row, ts) in frame.timestamps().iter().enumerate() {
        let mut rec = vec![ts.format("%Y-%m-%dT%H:%M:%S").to_string()];
        rec.extend(frame.channels().iter().map(|c| format_real(c.values[row])));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Vec<ChannelSpec> {
        vec![ChannelSpec::numeric("PM10", "ug/m3"), ChannelSpec::numeric("temp", "C")]
    }

    #[test]
    fn parses_complete_file() {
        let text = "time,PM10,temp\n2020-01-01T00:00:00,10,1.5\n2020-01-01T01:00:00,12,1.0\n2020-01-01 02:00:00,9,0.5\n";
        let f = parse_csv_reader(text.as_bytes(), &schema(), ParseOptions::default()).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.missing_count(), 0);
        assert_eq!(f.channel("PM10").unwrap(), &[10.0, 12.0, 9.0]);
    }

    #[test]
    fn blank_cell_is_missing() {
        let text = "time,PM10,temp\n2020-01-01T00:00:00,10,1.5\n2020-01-01T01:00:00,,1.0\n2020-01-01T02:00:00,9,0.5\n";
        let f = parse_csv_reader(text.as_bytes(), &schema(), ParseOptions::default()).unwrap();
        assert_eq!(f.missing_count(), 1);
        assert!(f.channel("PM10").unwrap()[1].is_nan());
        assert!(f.channel("temp").unwrap().iter().all(|v| !v.is_nan()));
    }

    #[test]
    fn gap_filled_or_rejected() {
        let text = "time,PM10,temp\n2020-01-01T00:00:00,10,1.5\n2020-01-01T02:00:00,9,0.5\n";
        let f = parse_csv_reader(text.as_bytes(), &schema(), ParseOptions::default()).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.missing_count(), 2);
        let err = parse_csv_reader(text.as_bytes(), &schema(), ParseOptions { max_gap_hours: 0 }).unwrap_err();
        assert!(matches!(err, Error::GapTooLarge { hours: 1, .. }));
    }

    #[test]
    fn errors() {
        let text = "time,PM10\n2020-01-01T00:00:00,10\n";
        let err = parse_csv_reader(text.as_bytes(), &schema(), ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "temp"));
        let text = "time,PM10,temp\n2020-01-01T01:00:00,10,1\n2020-01-01T00:00:00,10,1\n";
        let err = parse_csv_reader(text.as_bytes(), &schema(), ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonMonotonicTime { row: 2 }));
    }

    #[test]
    fn compass_column_is_expanded() {
        let text = "time,wd\n2020-01-01T00:00:00,N\n2020-01-01T01:00:00,E\n2020-01-01T02:00:00,\n";
        let f = parse_csv_reader(text.as_bytes(), &[ChannelSpec::compass("wd")], ParseOptions::default()).unwrap();
        assert_eq!(f.channel_names(), vec!["wd_sin", "wd_cos"]);
        assert_eq!(f.channel("wd_cos").unwrap()[0], 1.0);
        assert!(f.channel("wd_sin").unwrap()[2].is_nan());
    }

    #[test]
    fn write_then_parse_round_trips() {
        let text = "timestamp,PM10,temp\n2020-01-01T00:00:00,10.25,\n2020-01-01T01:00:00,-3,1e-5\n";
        let f = parse_csv_reader(text.as_bytes(), &schema(), ParseOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_csv_writer(&f, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "timestamp,PM10,temp\n2020-01-01T00:00:00,10.25,\n2020-01-01T01:00:00,-3,0.00001\n");
        let g = parse_csv_reader(buf.as_slice(), &schema(), ParseOptions::default()).unwrap();
        assert_eq!(f.timestamps(), g.timestamps());
        assert_eq!(f.channel("PM10").unwrap(), g.channel("PM10").unwrap());
    }

    #[test]
    fn format_real_is_nine_significant_digits() {
        assert_eq!(format_real(std::f64::consts::PI), "3.14159265");
        assert_eq!(format_real(-1234567891234.0), "-1234567890000");
        assert_eq!(format_real(f64::NAN), "");
    }
}
