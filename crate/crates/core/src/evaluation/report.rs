use serde::{Deserialize, Serialize};

use super::metrics::{Metric, MetricConvention};
use crate::ingest::format_real;

/// One metric value, or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCell {
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl MetricCell {
    pub fn ok(value: f64) -> Self {
        Self {
            value: Some(value),
            error: None,
        }
    }

    pub fn failed(error: impl Into<String>) -> Self {
        Self {
            value: None,
            error: Some(error.into()),
        }
    }
}

/// Metrics of one (model, loss, horizon) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub model: String,
    /// Training loss label, `"none"` for models without one.
    pub loss: String,
    pub horizon: usize,
    pub n_samples: usize,
    pub nmbf: MetricCell,
    pub nmaef: MetricCell,
    pub rmse: MetricCell,
    pub corr: MetricCell,
}

impl ReportEntry {
    pub fn cell(&self, metric: Metric) -> &MetricCell {
        match metric {
            Metric::Nmbf => &self.nmbf,
            Metric::Nmaef => &self.nmaef,
            Metric::Rmse => &self.rmse,
            Metric::Corr => &self.corr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub horizons: Vec<usize>,
    pub convention: MetricConvention,
    /// `"deseasonalized"` or `"raw"`.
    pub scale: String,
    pub entries: Vec<ReportEntry>,
}

impl MetricsReport {
    pub fn get(&self, model: &str, loss: &str, horizon: usize) -> Option<&ReportEntry> {
        self.entries
            .iter()
            .find(|e| e.model == model && e.loss == loss && e.horizon == horizon)
    }

    fn distinct<F: Fn(&ReportEntry) -> &str>(&self, key: F) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if !out.iter().any(|k| k == key(e)) {
                out.push(key(e).to_string());
            }
        }
        out
    }

    /// Rows are metric x model, columns are loss x horizon. Failed cells are
    /// written as `null`, combinations that were not run are left empty.
    pub fn to_csv(&self) -> String {
        let models = self.distinct(|e| &e.model);
        let losses = self.distinct(|e| &e.loss);
        let mut out = String::from("metric,model");
        for loss in &losses {
            for h in &self.horizons {
                out.push_str(&format!(",{loss}_h{h}"));
            }
        }
        out.push('\n');
        for metric in Metric::ALL {
            for model in &models {
                out.push_str(metric.name());
                out.push(',');
                out.push_str(model);
                for loss in &losses {
                    for &h in &self.horizons {
                        out.push(',');
                        if let Some(e) = self.get(model, loss, h) {
                            match e.cell(metric).value {
                                Some(v) => out.push_str(&format_real(v)),
                                None => out.push_str("null"),
                            }
                        }
                    }
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(model: &str, loss: &str, h: usize, rmse: MetricCell) -> ReportEntry {
        ReportEntry {
            model: model.into(),
            loss: loss.into(),
            horizon: h,
            n_samples: 10,
            nmbf: MetricCell::ok(0.0),
            nmaef: MetricCell::ok(0.5),
            rmse,
            corr: MetricCell::failed("ZeroVariance"),
        }
    }

    #[test]
    fn csv_layout() {
        let r = MetricsReport {
            horizons: vec![3, 6],
            convention: MetricConvention::Standard,
            scale: "raw".into(),
            entries: vec![
                entry("AR(2)", "none", 3, MetricCell::ok(1.5)),
                entry("AR(2)", "none", 6, MetricCell::ok(2.0)),
                entry("Hybrid", "mccr", 3, MetricCell::ok(1.25)),
            ],
        };
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "metric,model,none_h3,none_h6,mccr_h3,mccr_h6");
        assert_eq!(lines.len(), 1 + 4 * 2);
        assert!(lines.contains(&"RMSE,AR(2),1.5,2,,"));
        assert!(lines.contains(&"RMSE,Hybrid,,,1.25,"));
        assert!(lines.contains(&"Corr,AR(2),null,null,,"));
    }
}
