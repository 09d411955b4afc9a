//! `appletgen`: validate catalogs, build vector files, turn requests into
//! applets, run batches and evaluate predictions.

mod commands;
mod config;
mod error;
mod setup;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::EvalArgs;
use config::{EngineArgs, EngineConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "appletgen", version, about = "Turns automation requests into trigger-action applets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a catalog file and report its size.
    Ingest {
        /// Catalog file.
        catalog: PathBuf,
    },
    /// Embed every catalog entry and write the trigger and action vector files.
    Index {
        #[command(flatten)]
        engine: EngineArgs,
        /// Write `triggers.tapvec` and `actions.tapvec` here instead of the
        /// configured paths.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Write the text variant of the vector format.
        #[arg(long)]
        text: bool,
    },
    /// Generate an applet for one request and print it as JSON.
    Query {
        #[command(flatten)]
        engine: EngineArgs,
        /// Natural-language request.
        query: String,
        /// Print the whole run: candidates, pair queue, attempts and outcome.
        #[arg(long)]
        trace: bool,
    },
    /// Run every query in a file and write one prediction per line.
    RunBatch {
        #[command(flatten)]
        engine: EngineArgs,
        /// Query file: plain-text lines or JSON objects with a `query` field.
        #[arg(long)]
        queries: PathBuf,
        /// Prediction output (JSON lines); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predictions against gold records.
    Eval {
        #[command(flatten)]
        engine: EngineArgs,
        /// Gold records (JSON lines).
        #[arg(long, required_unless_present = "check_report")]
        gold: Option<PathBuf>,
        /// Predictions (JSON lines); when omitted the pipeline runs on the
        /// gold queries.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Also write the predictions produced by the pipeline.
        #[arg(long, conflicts_with = "predictions")]
        save_predictions: Option<PathBuf>,
        /// Count a prediction correct when it names the right service.
        #[arg(long)]
        service_level: bool,
        /// Cut-offs for Recall@K and MRR@K.
        #[arg(long, value_delimiter = ',', default_values_t = commands::default_cutoffs())]
        cutoffs: Vec<usize>,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only re-check the invariants of an existing report.
        #[arg(long, conflicts_with_all = ["gold", "predictions", "save_predictions"])]
        check_report: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { catalog } => commands::ingest(&catalog),
        Command::Index { engine, out_dir, text } => {
            commands::index(&EngineConfig::from_args(&engine)?, out_dir.as_deref(), text)
        }
        Command::Query { engine, query, trace } => commands::query(&EngineConfig::from_args(&engine)?, &query, trace),
        Command::RunBatch { engine, queries, out } => {
            commands::run_batch(&EngineConfig::from_args(&engine)?, &queries, out.as_deref())
        }
        Command::Eval {
            check_report: Some(path),
            ..
        } => commands::check_report(&path),
        Command::Eval {
            engine,
            gold,
            predictions,
            save_predictions,
            service_level,
            cutoffs,
            out,
            check_report: None,
        } => {
            let gold = gold.ok_or_else(|| CliError::Usage("--gold is required".into()))?;
            commands::eval(
                &EngineConfig::from_args(&engine)?,
                EvalArgs {
                    gold: &gold,
                    predictions: predictions.as_deref(),
                    save_predictions: save_predictions.as_deref(),
                    service_level,
                    cutoffs,
                    out: out.as_deref(),
                },
            )
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
