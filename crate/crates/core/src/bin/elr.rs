use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use elr::cli::{self, MinLeafRule, RunConfig};
use elr::synth::{self, SynthConfig};
use elr::{json, Result};

/// Logistic regression with tree-detected threshold effects.
///
/// Log verbosity is read from ELR_LOG (error, warn, info, debug, trace).
#[derive(Parser)]
#[command(name = "elr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: impute, split, detect, screen, fit and evaluate.
    Run(RunArgs),
    /// Generate a synthetic dataset with planted threshold effects.
    Synth(SynthArgs),
    /// Fill missing cells by EM and write the completed CSV.
    Impute(DataArgs),
    /// Fit the baseline logistic model on every row.
    Fit(DataArgs),
    /// Grow the detection trees and print the candidate ledger.
    Detect(DetectArgs),
    /// Apply a saved model.json to a CSV.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    pi: Option<f64>,
    /// `auto`, a row count, or a fraction of the training rows.
    #[arg(long)]
    min_leaf: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON generator configuration; the built-in fixture when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    missing_rate: Option<f64>,
    /// Also write the generator's schema as JSON.
    #[arg(long)]
    schema_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Output file; stdout when absent (except for impute, where it is required).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    io: DataArgs,
    #[arg(long, default_value = "auto")]
    min_leaf: String,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    io: DataArgs,
}

fn config_error(msg: &str) -> elr::Error {
    elr::Error::Config(msg.to_string())
}

fn emit<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => json::write_file(p, value),
        None => {
            print!("{}", json::to_string(value)?);
            Ok(())
        }
    }
}

fn run_config(a: RunArgs) -> Result<RunConfig> {
    let mut c = match &a.config {
        Some(p) => RunConfig::from_json_file(p)?,
        None => RunConfig::new(
            a.data.clone().ok_or_else(|| config_error("--data is required"))?,
            a.out.clone().ok_or_else(|| config_error("--out is required"))?,
        ),
    };
    if let Some(v) = a.data {
        c.data = v;
    }
    if let Some(v) = a.out {
        c.out = v;
    }
    if a.schema.is_some() {
        c.schema = a.schema;
    }
    c.ratio = a.ratio.unwrap_or(c.ratio);
    c.seed = a.seed.unwrap_or(c.seed);
    c.alpha = a.alpha.unwrap_or(c.alpha);
    c.pi = a.pi.unwrap_or(c.pi);
    if let Some(m) = a.min_leaf {
        c.min_leaf = m.parse::<MinLeafRule>()?;
    }
    Ok(c)
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(a) => {
            let config = run_config(a)?;
            let out = cli::run_pipeline(&config)?;
            eprintln!(
                "selected {} of {} candidates; artifacts in {}",
                out.selected().count(),
                out.screening.len(),
                config.out.display()
            );
            Ok(())
        }
        Command::Synth(a) => {
            let mut c = match &a.config {
                Some(p) => SynthConfig::from_json_file(p)?,
                None => synth::table1_like(2000, 0),
            };
            c.seed = a.seed.unwrap_or(c.seed);
            c.n = a.n.unwrap_or(c.n);
            c.missing_rate = a.missing_rate.unwrap_or(c.missing_rate);
            if let Some(p) = &a.schema_out {
                json::write_file(p, &c.schema()?)?;
            }
            cli::synth(&c, &a.out)?;
            Ok(())
        }
        Command::Impute(a) => {
            let schema = cli::load_schema(a.schema.as_deref())?;
            let out = a.out.ok_or_else(|| config_error("--out is required"))?;
            cli::impute(&a.data, &schema, &out)?;
            Ok(())
        }
        Command::Fit(a) => {
            let schema = cli::load_schema(a.schema.as_deref())?;
            emit(&cli::fit_baseline_table(&a.data, &schema)?, a.out.as_deref())
        }
        Command::Detect(a) => {
            let schema = cli::load_schema(a.io.schema.as_deref())?;
            let rule = a.min_leaf.parse::<MinLeafRule>()?;
            emit(&cli::detect(&a.io.data, &schema, rule)?, a.io.out.as_deref())
        }
        Command::Evaluate(a) => {
            let schema = cli::load_schema(a.io.schema.as_deref())?;
            emit(
                &cli::evaluate_saved(&a.model, &a.io.data, &schema)?,
                a.io.out.as_deref(),
            )
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ELR_LOG", "warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", cli::error_json(&e));
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
