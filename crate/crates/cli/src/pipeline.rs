use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tailcast_core::baselines::{ArForecaster, ArModel, OuForecaster};
use tailcast_core::diagnostics::{acf, compare_tails, dfa, pacf, AcfResult, DfaConfig, DfaResult};
use tailcast_core::evaluation::{
    blocked_splits, evaluate, forecast_test_block, generate_synthetic_data, train_ar, train_hybrid, train_ou,
    EvalOptions, MetricsReport, Role, SplitPlan, TrackedFrame,
};
use tailcast_core::ingest::{
    format_real, impute_knn, parse_csv, write_csv, ChannelMeans, ChannelSpec, ImputationConfig,
    ParseOptions,
};
use tailcast_core::neural::{load_checkpoint, save_checkpoint, HybridForecaster, LossKind, WindowSpec};
use tailcast_core::seasonal::{decompose, decompose_frame, DecomposeConfig, SeasonalComponents};
use tailcast_core::{Forecaster, TimeSeriesFrame};

use crate::config::{MetricScale, ModelChoice, ModelKind, RunConfig};
use crate::error::CliError;

pub type Result<T> = std::result::Result<T, CliError>;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synth,
    Decompose,
    Diagnose,
    Fit,
    Forecast,
    Evaluate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Decompose => "decompose",
            Command::Diagnose => "diagnose",
            Command::Fit => "fit",
            Command::Forecast => "forecast",
            Command::Evaluate => "evaluate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub command: String,
    pub artifacts: Vec<String>,
}

/// Index of a run directory. Re-running a subcommand replaces its step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub versions: BTreeMap<String, String>,
    pub seed: u64,
    pub config: RunConfig,
    pub component_seeds: BTreeMap<String, u64>,
    pub steps: Vec<Step>,
    /// Every file in the run directory other than the manifest itself.
    pub artifacts: Vec<String>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Option<Manifest>> {
        let path = dir.join(MANIFEST);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(Some(serde_json::from_str(&text).map_err(tailcast_core::Error::from)?))
    }
}

/// Rounds every non-integer number to nine significant digits so the text
/// form does not depend on the last bits of a computation.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                let r: f64 = format_real(x).parse().unwrap_or(x);
                *v = json!(r);
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn to_json_text<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(tailcast_core::Error::from)?;
    round_floats(&mut v);
    Ok(serde_json::to_string_pretty(&v).map_err(tailcast_core::Error::from)? + "\n")
}

fn cell(v: f64) -> String {
    format_real(v)
}

struct Run<'a> {
    cfg: &'a RunConfig,
    dir: PathBuf,
    written: Vec<String>,
    seeds: BTreeMap<String, u64>,
}

impl<'a> Run<'a> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, name: &str) {
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.path(name);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.record(name);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = to_json_text(value)?;
        self.write_text(name, &text)
    }

    fn write_frame(&mut self, name: &str, frame: &TimeSeriesFrame) -> Result<()> {
        write_csv(frame, self.path(name))?;
        self.record(name);
        Ok(())
    }

    fn seed(&mut self, component: &str) -> u64 {
        let s = self.cfg.seed_for(component);
        self.seeds.insert(component.to_string(), s);
        s
    }

    fn finish(self, command: Command) -> Result<Vec<String>> {
        let previous = Manifest::load(&self.dir)?;
        let mut steps = previous.as_ref().map(|m| m.steps.clone()).unwrap_or_default();
        let mut seeds = previous.map(|m| m.component_seeds).unwrap_or_default();
        seeds.extend(self.seeds);
        let mut written = self.written.clone();
        written.sort();
        steps.retain(|s| s.command != command.name());
        steps.push(Step {
            command: command.name().into(),
            artifacts: written.clone(),
        });
        let mut artifacts: Vec<String> = steps.iter().flat_map(|s| s.artifacts.iter().cloned()).collect();
        artifacts.sort();
        artifacts.dedup();
        let manifest = Manifest {
            tool: "tailcast".into(),
            versions: BTreeMap::from([
                ("tailcast".to_string(), env!("CARGO_PKG_VERSION").to_string()),
                ("tailcast-core".to_string(), tailcast_core::VERSION.to_string()),
            ]),
            seed: self.cfg.seed,
            config: self.cfg.clone(),
            component_seeds: seeds,
            steps,
            artifacts,
        };
        let path = self.dir.join(MANIFEST);
        std::fs::write(&path, to_json_text(&manifest)?).map_err(|e| CliError::io(&path, e))?;
        Ok(written)
    }
}

/// Runs one subcommand and returns the artifacts it wrote, relative to the
/// run directory.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Vec<String>> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let mut run = Run {
        cfg,
        dir: cfg.out.clone(),
        written: Vec::new(),
        seeds: BTreeMap::new(),
    };
    match command {
        Command::Synth => synth(&mut run)?,
        Command::Decompose => decompose_cmd(&mut run)?,
        Command::Diagnose => diagnose(&mut run)?,
        Command::Fit => {
            let prepared = prepare(cfg, load_input(&run)?)?;
            let choice = ModelChoice {
                model: cfg.model,
                loss: cfg.loss,
            };
            fit_model(&mut run, &prepared, choice)?;
        }
        Command::Forecast => forecast(&mut run)?,
        Command::Evaluate => evaluate_cmd(&mut run)?,
    }
    run.finish(command)
}

fn synth(run: &mut Run) -> Result<()> {
    let spec = run.cfg.synthetic_spec();
    let data = generate_synthetic_data(&spec, run.seed("synth"))?;
    run.write_frame("synth.csv", &data.frame)?;
    let mut text = format!("timestamp,{}\n", spec.target);
    for (t, v) in data.frame.timestamps().iter().zip(&data.clean_target) {
        text.push_str(&format!("{},{}\n", t.format("%Y-%m-%dT%H:%M:%S"), cell(*v)));
    }
    run.write_text("synth_clean.csv", &text)?;
    run.write_json("synth_spec.json", &spec)
}

fn schema(cfg: &RunConfig, path: &Path) -> Result<Vec<ChannelSpec>> {
    if !cfg.channels.is_empty() {
        return Ok(cfg
            .channels
            .iter()
            .map(|c| match c.split_once(':') {
                Some((name, kind)) if kind.eq_ignore_ascii_case("compass") => ChannelSpec::compass(name),
                Some((name, _)) => ChannelSpec::numeric(name, ""),
                None => ChannelSpec::numeric(c, ""),
            })
            .collect());
    }
    let mut rdr = csv::Reader::from_path(path).map_err(tailcast_core::Error::from)?;
    let headers = rdr.headers().map_err(tailcast_core::Error::from)?;
    Ok(headers.iter().skip(1).map(|h| ChannelSpec::numeric(h.trim(), "")).collect())
}

/// Compass columns become `<name>_sin` / `<name>_cos`; these carry no
/// seasonal profile of their own.
fn compass_channels(cfg: &RunConfig) -> Vec<String> {
    cfg.channels
        .iter()
        .filter_map(|c| c.split_once(':'))
        .filter(|(_, k)| k.eq_ignore_ascii_case("compass"))
        .flat_map(|(n, _)| [format!("{n}_sin"), format!("{n}_cos")])
        .collect()
}

fn load_input(run: &Run) -> Result<TimeSeriesFrame> {
    let path = match &run.cfg.input {
        Some(p) => p.clone(),
        None => {
            let p = run.path("synth.csv");
            if !p.exists() {
                return Err(CliError::MissingArtifact("synth.csv".into(), "synth"));
            }
            p
        }
    };
    let specs = schema(run.cfg, &path)?;
    let frame = parse_csv(&path, &specs, ParseOptions::default())?;
    let frame = if frame.missing_count() > 0 {
        impute_knn(&frame, ImputationConfig { k: run.cfg.impute_k })?
    } else {
        frame
    };
    frame.channel_index(&run.cfg.target)?;
    Ok(frame)
}

/// Seasonal profile fields of one channel, without the residual series.
#[derive(Serialize)]
struct Profiles<'a> {
    channel: &'a str,
    yearly_raw: &'a [f64],
    yearly_smoothed: &'a [f64],
    weekly: &'a [f64],
    daily: &'a [f64],
}

impl<'a> From<&'a SeasonalComponents> for Profiles<'a> {
    fn from(c: &'a SeasonalComponents) -> Self {
        Self {
            channel: &c.channel,
            yearly_raw: &c.yearly_raw,
            yearly_smoothed: &c.yearly_smoothed,
            weekly: &c.weekly,
            daily: &c.daily,
        }
    }
}

fn decompose_cmd(run: &mut Run) -> Result<()> {
    let frame = load_input(run)?;
    let (residual, comps) = decompose_frame(&frame, &DecomposeConfig::default(), &compass_channels(run.cfg))?;
    let profiles: Vec<Profiles> = comps.iter().map(Profiles::from).collect();
    run.write_json("components.json", &profiles)?;
    run.write_frame("residuals.csv", &residual)
}

fn acf_summary(a: &AcfResult) -> Value {
    json!({
        "decorrelation_time": a.decorrelation_time,
        "classification": a.classification,
        "confidence_band": a.confidence_band,
    })
}

fn dfa_summary(d: &DfaResult) -> Value {
    json!({
        "h": d.h,
        "xi": d.xi,
        "regime": d.regime,
        "fit_range": [d.fit_range.0, d.fit_range.1],
        "detrend_order": d.detrend_order,
    })
}

fn diagnose(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let frame = load_input(run)?;
    let raw = frame.channel(&cfg.target)?.to_vec();
    let comps = decompose(&cfg.target, frame.timestamps(), &raw, &DecomposeConfig::default())?;
    let residual = &comps.residual;
    let lag = cfg.max_lag.min(raw.len() - 1);
    let (acf_raw, acf_res) = (acf(&raw, lag)?, acf(residual, lag)?);
    let (pacf_raw, pacf_res) = (pacf(&raw, lag)?, pacf(residual, lag)?);
    let mut text = String::from("lag,acf_raw,acf_residual,pacf_raw,pacf_residual,band_raw\n");
    for r in 0..=lag {
        let p = |v: &[f64]| if r == 0 { String::new() } else { cell(v[r - 1]) };
        text.push_str(&format!(
            "{r},{},{},{},{},{}\n",
            cell(acf_raw.values[r]),
            cell(acf_res.values[r]),
            p(&pacf_raw),
            p(&pacf_res),
            cell(acf_raw.confidence_band)
        ));
    }
    run.write_text("acf.csv", &text)?;

    let dfa_cfg = DfaConfig {
        detrend_order: cfg.dfa_order,
        ..DfaConfig::default()
    };
    let (dfa_raw, dfa_res) = (dfa(&raw, &dfa_cfg)?, dfa(residual, &dfa_cfg)?);
    let mut text = String::from("segment_size,fluctuation_raw,fluctuation_residual\n");
    for (i, s) in dfa_raw.segment_sizes.iter().enumerate() {
        text.push_str(&format!(
            "{s},{},{}\n",
            cell(dfa_raw.fluctuations[i]),
            cell(dfa_res.fluctuations[i])
        ));
    }
    run.write_text("dfa.csv", &text)?;

    let tails = compare_tails(&raw)?;
    run.write_json("tails.json", &tails)?;
    run.write_json(
        "diagnostics.json",
        &json!({
            "target": cfg.target,
            "n": raw.len(),
            "acf": { "raw": acf_summary(&acf_raw), "residual": acf_summary(&acf_res) },
            "dfa": { "raw": dfa_summary(&dfa_raw), "residual": dfa_summary(&dfa_res) },
        }),
    )
}

/// Model-ready data: seasonal profiles fitted on the training blocks and
/// removed from every row, then channel means of the training blocks
/// subtracted.
pub struct Prepared {
    pub raw: TimeSeriesFrame,
    pub frame: TimeSeriesFrame,
    pub plan: SplitPlan,
    pub means: ChannelMeans,
    /// Mean of the raw target over the training blocks.
    pub raw_level: f64,
    pub target_components: Option<SeasonalComponents>,
}

pub fn prepare(cfg: &RunConfig, raw: TimeSeriesFrame) -> Result<Prepared> {
    let plan = blocked_splits(raw.len(), cfg.ratios(), cfg.folds)?;
    plan.require_block_len(cfg.window + cfg.horizon)?;
    let train = plan.ranges(Role::Train);
    let mut frame = raw.clone();
    let mut target_components = None;
    if cfg.deseasonalize {
        let exempt = compass_channels(cfg);
        let ts: Vec<_> = train.iter().flat_map(|r| raw.timestamps()[r.clone()].iter().copied()).collect();
        for ch in raw.channels() {
            if exempt.contains(&ch.name) {
                continue;
            }
            let values: Vec<f64> = train.iter().flat_map(|r| ch.values[r.clone()].iter().copied()).collect();
            let comps = decompose(&ch.name, &ts, &values, &DecomposeConfig::default())?;
            let residual = comps.deseasonalize(&ch.values, raw.timestamps())?;
            frame.set_channel(&ch.name, &ch.unit, residual)?;
            if ch.name == cfg.target {
                target_components = Some(comps);
            }
        }
    }
    let means = ChannelMeans::from_rows(&frame, &train);
    let frame = means.apply(&frame);
    let raw_level = ChannelMeans::from_rows(&raw, &train).get(&cfg.target)?;
    Ok(Prepared {
        raw,
        frame,
        plan,
        means,
        raw_level,
        target_components,
    })
}

fn fit_model(run: &mut Run, p: &Prepared, choice: ModelChoice) -> Result<Box<dyn Forecaster>> {
    let cfg = run.cfg;
    let data = TrackedFrame::new(&p.frame);
    let stem = choice.stem();
    match choice.model {
        ModelKind::Ar => {
            let f = train_ar(&data, &p.plan, &cfg.target, cfg.max_p)?;
            run.write_json(&format!("{stem}.json"), &f.model)?;
            Ok(Box::new(f))
        }
        ModelKind::Ou => {
            let seed = run.seed("ou");
            let f = train_ou(&data, &p.plan, &cfg.target, cfg.max_lag, cfg.ou_paths, seed)?;
            run.write_json(&format!("{stem}.json"), &f)?;
            Ok(Box::new(f))
        }
        ModelKind::Hybrid => {
            let spec = WindowSpec::for_frame(&p.frame, cfg.window, cfg.horizon, &cfg.target)?;
            let loss = cfg.loss_spec(choice.loss)?;
            let seed = run.seed(&stem);
            let (f, report) =
                train_hybrid(&data, &p.plan, &spec, &cfg.hybrid_config(), &cfg.train_config(), &loss, seed)?;
            let (json_path, bin_path) = save_checkpoint(&f.model, &loss, &run.path(&stem))?;
            for path in [json_path, bin_path] {
                if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                    run.record(name);
                }
            }
            let mut text = String::from("epoch,train_loss,val_loss\n");
            for (i, t) in report.train_loss.iter().enumerate() {
                let v = report.val_loss.get(i).map_or(String::new(), |v| cell(*v));
                text.push_str(&format!("{},{},{v}\n", i + 1, cell(*t)));
            }
            run.write_text(&format!("{stem}_loss.csv"), &text)?;
            run.write_json(
                &format!("{stem}_training.json"),
                &json!({
                    "epochs": report.epochs(),
                    "best_epoch": report.best_epoch,
                    "stopped_early": report.stopped_early,
                    "train_windows": p.plan.window_origins(Role::Train, spec.input_length + spec.horizon, 1).len(),
                    "loss": loss.label(),
                    "beta": (choice.loss == LossKind::Mccr).then(|| cfg.beta()),
                }),
            )?;
            Ok(Box::new(f))
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(serde_json::from_str(&text).map_err(tailcast_core::Error::from)?)
}

/// A previously fitted model from the run directory, if present.
fn load_model(run: &Run, choice: ModelChoice) -> Result<Option<Box<dyn Forecaster>>> {
    let stem = choice.stem();
    let path = run.path(&format!("{stem}.json"));
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(match choice.model {
        ModelKind::Ar => Box::new(ArForecaster {
            model: read_json::<ArModel>(&path)?,
        }),
        ModelKind::Ou => Box::new(read_json::<OuForecaster>(&path)?),
        ModelKind::Hybrid => {
            let (model, loss) = load_checkpoint(&path)?;
            Box::new(HybridForecaster { model, loss })
        }
    }))
}

fn eval_options<'p>(cfg: &RunConfig, p: &'p Prepared, raw_scale: bool) -> Result<EvalOptions<'p>> {
    let mut o = EvalOptions::new(cfg.window);
    o.horizons = cfg.horizons.clone();
    o.stride = cfg.stride;
    o.convention = cfg.metric_convention;
    if raw_scale {
        o.target_offset = p.means.get(&cfg.target)?;
        o.seasonal = p.target_components.as_ref();
    } else {
        // Seasonally adjusted values keep the level: adding the raw
        // training mean puts them back around the observed concentrations.
        o.target_offset = p.raw_level;
    }
    Ok(o)
}

fn forecast(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let choice = ModelChoice {
        model: cfg.model,
        loss: cfg.loss,
    };
    let model = load_model(run, choice)?.ok_or_else(|| CliError::MissingArtifact(format!("{}.json", choice.stem()), "fit"))?;
    let p = prepare(cfg, load_input(run)?)?;
    let options = eval_options(cfg, &p, true)?;
    let per_h = forecast_test_block(model.as_ref(), &p.plan, &p.frame, &cfg.target, &options)?;
    let mut text = String::from("horizon,timestamp,actual,predicted\n");
    for (h, f) in &per_h {
        for i in 0..f.rows.len() {
            let ts = p.raw.timestamps()[f.rows[i]].format("%Y-%m-%dT%H:%M:%S");
            text.push_str(&format!("{h},{ts},{},{}\n", cell(f.actual[i]), cell(f.predicted[i])));
        }
    }
    run.write_text(&format!("forecast_{}.csv", choice.stem()), &text)
}

fn evaluate_cmd(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let p = prepare(cfg, load_input(run)?)?;
    let mut models: Vec<Box<dyn Forecaster>> = Vec::new();
    for choice in cfg.model_choices() {
        let m = match load_model(run, choice)? {
            Some(m) => m,
            None => fit_model(run, &p, choice)?,
        };
        models.push(m);
    }
    let refs: Vec<&dyn Forecaster> = models.iter().map(|m| m.as_ref()).collect();
    let raw_scale = cfg.metric_scale == MetricScale::Raw;
    let options = eval_options(cfg, &p, raw_scale)?;
    let mut report: MetricsReport = evaluate(&refs, &p.plan, &p.frame, &cfg.target, &options)?;
    if !cfg.deseasonalize {
        report.scale = "raw".into();
    }
    run.write_text("metrics.csv", &report.to_csv())?;
    run.write_json("metrics.json", &report)
}
