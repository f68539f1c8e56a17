use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tailcast::{run, CliError, Command, RunConfig};

#[derive(Parser)]
#[command(name = "tailcast", version, about = "Heavy-tail-aware hourly forecasting pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Input CSV (defaults to the run directory's synth.csv).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Any config key, e.g. `--set epochs=50`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
}

#[derive(Args)]
struct ModelArgs {
    /// hybrid, ar or ou.
    #[arg(long)]
    model: Option<String>,
    /// mse or mccr.
    #[arg(long)]
    loss: Option<String>,
    /// MCCR scale.
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic hourly dataset.
    Synth,
    /// Seasonal decomposition of every channel.
    Decompose,
    /// ACF, PACF, DFA and tail fits of the target.
    Diagnose,
    /// Fit one model on the training blocks.
    Fit(ModelArgs),
    /// Forecast the test block with a fitted model.
    Forecast(ModelArgs),
    /// Score the configured models on the test block.
    Evaluate,
}

fn overrides(cli: &Cli) -> Result<(Command, Vec<(String, String)>), CliError> {
    let mut flags: Vec<(String, String)> = Vec::new();
    if let Some(s) = cli.seed {
        flags.push(("seed".into(), s.to_string()));
    }
    if let Some(o) = &cli.out {
        flags.push(("out".into(), o.display().to_string()));
    }
    if let Some(i) = &cli.input {
        flags.push(("input".into(), i.display().to_string()));
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        flags.push((k.trim().to_string(), v.to_string()));
    }
    let (command, model_args) = match &cli.command {
        Cmd::Synth => (Command::Synth, None),
        Cmd::Decompose => (Command::Decompose, None),
        Cmd::Diagnose => (Command::Diagnose, None),
        Cmd::Fit(a) => (Command::Fit, Some(a)),
        Cmd::Forecast(a) => (Command::Forecast, Some(a)),
        Cmd::Evaluate => (Command::Evaluate, None),
    };
    if let Some(a) = model_args {
        if let Some(m) = &a.model {
            flags.push(("model".into(), m.clone()));
        }
        if let Some(l) = &a.loss {
            flags.push(("loss".into(), l.clone()));
        }
        if let Some(b) = a.beta {
            flags.push(("beta".into(), b.to_string()));
        }
    }
    Ok((command, flags))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let err = CliError::Usage(e.kind().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    let result = overrides(&cli).and_then(|(command, flags)| {
        let cfg = RunConfig::resolve(cli.config.as_deref(), &flags, std::env::vars())?;
        run(command, &cfg)
    });
    match result {
        Ok(artifacts) => {
            for a in artifacts {
                println!("{a}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
