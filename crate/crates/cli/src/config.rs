use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tailcast_core::evaluation::{Contamination, CovariateSpec, MetricConvention, NoiseSpec, SyntheticSpec};
use tailcast_core::neural::{HybridConfig, LossKind, LossSpec, TrainConfig};

use crate::error::CliError;

pub const ENV_PREFIX: &str = "TAILCAST_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Hybrid,
    Ar,
    Ou,
}

impl ModelKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Hybrid => "hybrid",
            ModelKind::Ar => "ar",
            ModelKind::Ou => "ou",
        }
    }
}

/// A model together with its training loss; the loss only matters for
/// the hybrid model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelChoice {
    pub model: ModelKind,
    pub loss: LossKind,
}

impl ModelChoice {
    /// Artifact stem, e.g. `hybrid_mccr` or `ar`.
    pub fn stem(&self) -> String {
        match self.model {
            ModelKind::Hybrid => format!("hybrid_{}", loss_label(self.loss)),
            m => m.label().to_string(),
        }
    }
}

fn loss_label(kind: LossKind) -> &'static str {
    match kind {
        LossKind::Mse => "mse",
        LossKind::Mccr => "mccr",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricScale {
    Deseasonalized,
    Raw,
}

/// Every setting of a run. Parsed from a flat `key = value` file, then
/// overridden by command-line flags, then by `TAILCAST_<KEY>` variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Run directory. Not part of the recorded config, so identical runs in
    /// different directories produce identical manifests.
    #[serde(skip)]
    pub out: PathBuf,
    /// Input CSV; the run directory's `synth.csv` when unset.
    pub input: Option<PathBuf>,
    /// Input columns to read; every column after the timestamp when empty.
    /// `name:compass` marks a wind-direction column.
    pub channels: Vec<String>,
    pub target: String,
    pub impute_k: usize,

    pub n_hours: usize,
    pub level: f64,
    pub yearly_amplitude: f64,
    pub weekly_amplitude: f64,
    pub daily_amplitude: f64,
    pub ar: Vec<f64>,
    pub noise: String,
    pub noise_mu: f64,
    pub noise_sigma: f64,
    pub contamination_rate: f64,
    pub contamination_mu: f64,
    pub contamination_sigma: f64,
    pub covariate_leads: Vec<usize>,
    pub covariate_gain: f64,
    pub covariate_noise: f64,

    pub deseasonalize: bool,
    pub split: Vec<f64>,
    pub folds: usize,

    pub max_lag: usize,
    pub dfa_order: usize,

    pub model: ModelKind,
    pub loss: LossKind,
    /// MCCR scale; the per-target default when unset.
    pub beta: Option<f64>,
    pub window: usize,
    pub horizon: usize,
    pub batch: usize,
    pub lr: f64,
    pub l2: f64,
    pub epochs: usize,
    pub patience: usize,
    pub hidden: Vec<usize>,
    pub t2v_k: usize,
    pub max_p: usize,
    pub ou_paths: usize,

    pub models: Vec<String>,
    pub horizons: Vec<usize>,
    pub stride: usize,
    pub metric_scale: MetricScale,
    pub metric_convention: MetricConvention,
}

impl Default for RunConfig {
    fn default() -> Self {
        let synth = SyntheticSpec::default();
        Self {
            seed: 0,
            out: PathBuf::from("tailcast-run"),
            input: None,
            channels: Vec::new(),
            target: synth.target,
            impute_k: 5,
            n_hours: synth.n_hours,
            level: synth.level,
            yearly_amplitude: synth.yearly_amplitude,
            weekly_amplitude: synth.weekly_amplitude,
            daily_amplitude: synth.daily_amplitude,
            ar: synth.ar,
            noise: "gaussian".into(),
            noise_mu: 0.0,
            noise_sigma: 5.0,
            contamination_rate: 0.03,
            contamination_mu: 3.0,
            contamination_sigma: 0.7,
            covariate_leads: vec![6, 24],
            covariate_gain: 1.0,
            covariate_noise: 2.0,
            deseasonalize: true,
            split: vec![0.67, 0.20, 0.13],
            folds: 1,
            max_lag: 400,
            dfa_order: 2,
            model: ModelKind::Hybrid,
            loss: LossKind::Mccr,
            beta: None,
            window: 48,
            horizon: 24,
            batch: 64,
            lr: 1e-4,
            l2: 1e-4,
            epochs: 500,
            patience: 20,
            hidden: vec![64, 64],
            t2v_k: 8,
            max_p: 20,
            ou_paths: 1000,
            models: vec!["ar".into(), "ou".into(), "hybrid:mse".into(), "hybrid:mccr".into()],
            horizons: vec![3, 6, 12, 24],
            stride: 1,
            metric_scale: MetricScale::Deseasonalized,
            metric_convention: MetricConvention::Standard,
        }
    }
}

/// Recognised keys, in the order they are documented.
pub const KEYS: &[&str] = &[
    "seed",
    "out",
    "input",
    "channels",
    "target",
    "impute_k",
    "n_hours",
    "level",
    "yearly_amplitude",
    "weekly_amplitude",
    "daily_amplitude",
    "ar",
    "noise",
    "noise_mu",
    "noise_sigma",
    "contamination_rate",
    "contamination_mu",
    "contamination_sigma",
    "covariate_leads",
    "covariate_gain",
    "covariate_noise",
    "deseasonalize",
    "split",
    "folds",
    "max_lag",
    "dfa_order",
    "model",
    "loss",
    "beta",
    "window",
    "horizon",
    "batch",
    "lr",
    "l2",
    "epochs",
    "patience",
    "hidden",
    "t2v_k",
    "max_p",
    "ou_paths",
    "models",
    "horizons",
    "stride",
    "metric_scale",
    "metric_convention",
];

/// MCCR scale tuned for a multivariate MLP on each pollutant; 4.10 (shared
/// by both pollutants for the transformer) for anything else.
pub fn default_beta(target: &str) -> f64 {
    let key: String = target.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_lowercase();
    match key.as_str() {
        "pm10" => 4.60,
        "pm25" => 7.60,
        _ => 4.10,
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse {v:?}"))
}

fn parse_list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>, String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse_num).collect()
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {v:?}")),
    }
}

pub fn parse_loss(v: &str) -> Result<LossKind, String> {
    match v.to_ascii_lowercase().as_str() {
        "mse" => Ok(LossKind::Mse),
        "mccr" => Ok(LossKind::Mccr),
        _ => Err(format!("unknown loss {v:?} (expected mse or mccr)")),
    }
}

pub fn parse_model(v: &str) -> Result<ModelKind, String> {
    match v.to_ascii_lowercase().as_str() {
        "hybrid" => Ok(ModelKind::Hybrid),
        "ar" => Ok(ModelKind::Ar),
        "ou" => Ok(ModelKind::Ou),
        _ => Err(format!("unknown model {v:?} (expected hybrid, ar or ou)")),
    }
}

/// `ar`, `ou`, `hybrid:mse` or `hybrid:mccr` (`hybrid` alone uses the
/// configured loss).
pub fn parse_model_choice(v: &str, default_loss: LossKind) -> Result<ModelChoice, String> {
    let (m, l) = match v.split_once(':') {
        Some((m, l)) => (m, Some(l)),
        None => (v, None),
    };
    let model = parse_model(m.trim())?;
    let loss = match l {
        Some(l) => parse_loss(l.trim())?,
        None => default_loss,
    };
    Ok(ModelChoice { model, loss })
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "seed" => self.seed = parse_num(v)?,
            "out" => self.out = PathBuf::from(v),
            "input" => self.input = (!v.is_empty()).then(|| PathBuf::from(v)),
            "channels" => self.channels = parse_list(v)?,
            "target" => self.target = v.to_string(),
            "impute_k" => self.impute_k = parse_num(v)?,
            "n_hours" => self.n_hours = parse_num(v)?,
            "level" => self.level = parse_num(v)?,
            "yearly_amplitude" => self.yearly_amplitude = parse_num(v)?,
            "weekly_amplitude" => self.weekly_amplitude = parse_num(v)?,
            "daily_amplitude" => self.daily_amplitude = parse_num(v)?,
            "ar" => self.ar = parse_list(v)?,
            "noise" => {
                let n = v.to_ascii_lowercase();
                if !["none", "gaussian", "lognormal"].contains(&n.as_str()) {
                    return Err(format!("unknown noise {v:?} (expected none, gaussian or lognormal)"));
                }
                self.noise = n;
            }
            "noise_mu" => self.noise_mu = parse_num(v)?,
            "noise_sigma" => self.noise_sigma = parse_num(v)?,
            "contamination_rate" => self.contamination_rate = parse_num(v)?,
            "contamination_mu" => self.contamination_mu = parse_num(v)?,
            "contamination_sigma" => self.contamination_sigma = parse_num(v)?,
            "covariate_leads" => self.covariate_leads = parse_list(v)?,
            "covariate_gain" => self.covariate_gain = parse_num(v)?,
            "covariate_noise" => self.covariate_noise = parse_num(v)?,
            "deseasonalize" => self.deseasonalize = parse_bool(v)?,
            "split" => self.split = parse_list(v)?,
            "folds" => self.folds = parse_num(v)?,
            "max_lag" => self.max_lag = parse_num(v)?,
            "dfa_order" => self.dfa_order = parse_num(v)?,
            "model" => self.model = parse_model(v)?,
            "loss" => self.loss = parse_loss(v)?,
            "beta" => self.beta = if v.is_empty() { None } else { Some(parse_num(v)?) },
            "window" => self.window = parse_num(v)?,
            "horizon" => self.horizon = parse_num(v)?,
            "batch" => self.batch = parse_num(v)?,
            "lr" => self.lr = parse_num(v)?,
            "l2" => self.l2 = parse_num(v)?,
            "epochs" => self.epochs = parse_num(v)?,
            "patience" => self.patience = parse_num(v)?,
            "hidden" => self.hidden = parse_list(v)?,
            "t2v_k" => self.t2v_k = parse_num(v)?,
            "max_p" => self.max_p = parse_num(v)?,
            "ou_paths" => self.ou_paths = parse_num(v)?,
            "models" => {
                let list: Vec<String> = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
                for m in &list {
                    parse_model_choice(m, self.loss)?;
                }
                self.models = list;
            }
            "horizons" => self.horizons = parse_list(v)?,
            "stride" => self.stride = parse_num(v)?,
            "metric_scale" => {
                self.metric_scale = match v.to_ascii_lowercase().as_str() {
                    "deseasonalized" => MetricScale::Deseasonalized,
                    "raw" => MetricScale::Raw,
                    _ => return Err(format!("unknown metric scale {v:?} (expected deseasonalized or raw)")),
                }
            }
            "metric_convention" => {
                self.metric_convention = match v.to_ascii_lowercase().as_str() {
                    "standard" => MetricConvention::Standard,
                    "literal" => MetricConvention::Literal,
                    _ => return Err(format!("unknown metric convention {v:?} (expected standard or literal)")),
                }
            }
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Applies a config file's `key = value` lines. Blank lines and text
    /// after `#` are ignored; a key may appear only once.
    pub fn apply_text(&mut self, text: &str, source: &str) -> Result<(), CliError> {
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| CliError::ConfigParse {
                origin: source.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(err(format!("duplicate key {key:?}")));
            }
            seen.push(key.to_string());
            self.set(key, value).map_err(err)?;
        }
        Ok(())
    }

    /// Defaults, then `file`, then `flags`, then any `TAILCAST_<KEY>` entry
    /// of `env`, then validation.
    pub fn resolve<I>(file: Option<&Path>, flags: &[(String, String)], env: I) -> Result<Self, CliError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            cfg.apply_text(&text, &path.display().to_string())?;
        }
        for (k, v) in flags {
            cfg.set(k, v).map_err(|message| CliError::ConfigParse {
                origin: format!("--{k}"),
                line: 0,
                message,
            })?;
        }
        let mut env: Vec<(String, String)> = env
            .into_iter()
            .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|k| (k.to_ascii_lowercase(), v)))
            .filter(|(k, _)| KEYS.contains(&k.as_str()))
            .collect();
        env.sort();
        for (k, v) in env {
            cfg.set(&k, &v).map_err(|message| CliError::ConfigParse {
                origin: format!("{ENV_PREFIX}{}", k.to_ascii_uppercase()),
                line: 0,
                message,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |message: String| {
            Err(CliError::ConfigParse {
                origin: "config".into(),
                line: 0,
                message,
            })
        };
        let positive = [
            ("window", self.window),
            ("horizon", self.horizon),
            ("batch", self.batch),
            ("epochs", self.epochs),
            ("patience", self.patience),
            ("folds", self.folds),
            ("n_hours", self.n_hours),
            ("impute_k", self.impute_k),
            ("max_lag", self.max_lag),
            ("dfa_order", self.dfa_order),
            ("max_p", self.max_p),
            ("ou_paths", self.ou_paths),
            ("stride", self.stride),
        ];
        if let Some((k, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return bad(format!("{k} must be positive"));
        }
        for (k, v) in [("lr", self.lr), ("l2", self.l2)] {
            if !(v >= 0.0) || (k == "lr" && v == 0.0) {
                return bad(format!("{k} must be positive, got {v}"));
            }
        }
        if let Some(b) = self.beta {
            if !(b > 0.0) {
                return bad(format!("beta must be positive, got {b}"));
            }
        }
        if self.split.len() != 3 {
            return bad(format!("split needs three ratios, got {}", self.split.len()));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layer sizes must be positive".into());
        }
        if self.window < self.horizon {
            return bad(format!("window {} is shorter than horizon {}", self.window, self.horizon));
        }
        if self.horizons.is_empty() || self.horizons.iter().any(|h| *h == 0 || *h > self.horizon) {
            return bad(format!("horizons must lie in 1..={}", self.horizon));
        }
        if !(0.0..=1.0).contains(&self.contamination_rate) {
            return bad(format!("contamination_rate must lie in [0, 1], got {}", self.contamination_rate));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or_else(|| default_beta(&self.target))
    }

    pub fn loss_spec(&self, kind: LossKind) -> Result<LossSpec, tailcast_core::Error> {
        match kind {
            LossKind::Mse => Ok(LossSpec::mse()),
            LossKind::Mccr => LossSpec::mccr(self.beta()),
        }
    }

    pub fn model_choices(&self) -> Vec<ModelChoice> {
        self.models
            .iter()
            .filter_map(|m| parse_model_choice(m, self.loss).ok())
            .collect()
    }

    pub fn ratios(&self) -> (f64, f64, f64) {
        (self.split[0], self.split[1], self.split[2])
    }

    pub fn hybrid_config(&self) -> HybridConfig {
        HybridConfig {
            hidden: self.hidden.clone(),
            t2v_k: self.t2v_k,
            ..HybridConfig::default()
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch,
            learning_rate: self.lr,
            l2: self.l2,
            max_epochs: self.epochs,
            patience: self.patience,
            ..TrainConfig::default()
        }
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        let noise = match self.noise.as_str() {
            "none" => NoiseSpec::None,
            "lognormal" => NoiseSpec::Lognormal {
                mu: self.noise_mu,
                sigma: self.noise_sigma,
            },
            _ => NoiseSpec::Gaussian { sigma: self.noise_sigma },
        };
        let contamination = (self.contamination_rate > 0.0).then(|| Contamination {
            rate: self.contamination_rate,
            mu: self.contamination_mu,
            sigma: self.contamination_sigma,
        });
        let covariates = self
            .covariate_leads
            .iter()
            .map(|&lead| CovariateSpec {
                name: format!("lead{lead}"),
                gain: self.covariate_gain,
                lead,
                noise_sigma: self.covariate_noise,
            })
            .collect();
        SyntheticSpec {
            n_hours: self.n_hours,
            target: self.target.clone(),
            level: self.level,
            yearly_amplitude: self.yearly_amplitude,
            weekly_amplitude: self.weekly_amplitude,
            daily_amplitude: self.daily_amplitude,
            ar: self.ar.clone(),
            noise,
            contamination,
            covariates,
            ..SyntheticSpec::default()
        }
    }

    /// The seed handed to one component: the run seed plus the 64-bit
    /// FNV-1a hash of the component name, wrapping.
    pub fn seed_for(&self, component: &str) -> u64 {
        self.seed.wrapping_add(fnv1a(component))
    }
}

pub fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}
