use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use appletgen_core::embedding::{export_vectors, export_vectors_text};
use appletgen_core::eval::{read_jsonl, write_jsonl, EvalOptions, MatchLevel};
use appletgen_core::{
    build_index, evaluate_run, Engine, FunctionKind, GoldRecord, MetricsReport, Outcome, PipelineRun,
    PredictionRecord,
};
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::EngineConfig;
use crate::error::CliError;
use crate::setup::{build_engine, load_catalog, providers};

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::input(dir.display(), e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::input(path.display(), e))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::input(path.display(), e))
}

fn write_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::input(path.display(), e)
}

/// Writes to stdout. A closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    let mut lock = io::stdout().lock();
    match lock.write_all(text.as_bytes()).and_then(|_| lock.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::input("stdout", e)),
        _ => Ok(()),
    }
}

pub fn ingest(path: &Path) -> Result<(), CliError> {
    let catalog = load_catalog(path)?;
    emit(&format!(
        "{} entries valid ({} triggers, {} actions, {} categories)\n",
        catalog.len(),
        catalog.triggers().len(),
        catalog.actions().len(),
        catalog.categories().len()
    ))
}

/// Embeds both sides of the catalog and writes the two vector files.
pub fn index(cfg: &EngineConfig, out_dir: Option<&Path>, text: bool) -> Result<(), CliError> {
    let catalog = load_catalog(cfg.catalog_path()?)?;
    let (tp, ap) = providers(cfg)?;
    let ext = if text { "tapvec.txt" } else { "tapvec" };
    for (kind, provider, configured, stem) in [
        (FunctionKind::Trigger, &tp, &cfg.trigger_vectors, "triggers"),
        (FunctionKind::Action, &ap, &cfg.action_vectors, "actions"),
    ] {
        let path = match (out_dir, configured) {
            (Some(dir), _) => dir.join(format!("{stem}.{ext}")),
            (None, Some(p)) => p.clone(),
            (None, None) => {
                return Err(CliError::Usage(format!(
                    "no output path for {kind} vectors (use --out-dir or set {kind}_vectors)"
                )))
            }
        };
        let index = build_index(&catalog, kind, provider.as_ref())?;
        let mut out = create(&path)?;
        if text {
            export_vectors_text(&index, &mut out)
        } else {
            export_vectors(&index, &mut out)
        }
        .map_err(write_err(&path))?;
        emit(&format!(
            "wrote {} ({} {kind} vectors, dim {})\n",
            path.display(),
            index.len(),
            index.dim()
        ))?;
    }
    Ok(())
}

pub fn query(cfg: &EngineConfig, text: &str, trace: bool) -> Result<(), CliError> {
    let engine = build_engine(cfg)?;
    let run = engine.run(text)?;
    let json = if trace {
        serde_json::to_string_pretty(&run)
    } else {
        match &run.outcome {
            Outcome::Accepted(applet) => serde_json::to_string_pretty(applet),
            Outcome::Exhausted(report) => serde_json::to_string_pretty(report),
        }
    }
    .map_err(|e| CliError::Internal(e.to_string()))?;
    emit(&format!("{json}\n"))?;
    match run.outcome {
        Outcome::Accepted(_) => Ok(()),
        Outcome::Exhausted(report) => Err(CliError::Exhausted(format!(
            "{} attempts for `{}` all scored below {}",
            report.attempts.len(),
            report.query,
            report.threshold
        ))),
    }
}

#[derive(Deserialize)]
struct QueryLine {
    query: String,
}

/// One query per line: plain text, or a JSON object with a `query` field
/// (so gold files can be used directly). Blank lines are skipped.
pub fn read_queries(reader: impl BufRead) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::input("queries", e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('{') {
            let q: QueryLine =
                serde_json::from_str(trimmed).map_err(|e| CliError::input(format!("queries line {}", i + 1), e))?;
            out.push(q.query);
        } else {
            out.push(trimmed.to_string());
        }
    }
    Ok(out)
}

/// Runs every query on a pool of `parallelism` threads; results keep the
/// input order.
pub fn run_all(engine: &Engine, queries: &[String], parallelism: usize) -> Result<Vec<PipelineRun>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let runs = pool.install(|| {
        queries
            .par_iter()
            .map(|q| engine.run(q))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let accepted = runs.iter().filter(|r| r.applet().is_some()).count();
    log::info!("{} queries: {accepted} accepted, {} exhausted", runs.len(), runs.len() - accepted);
    Ok(runs)
}

fn write_predictions(path: Option<&Path>, preds: &[PredictionRecord]) -> Result<(), CliError> {
    match path {
        Some(path) => {
            let mut out = create(path)?;
            write_jsonl(&mut out, preds)
                .and_then(|_| out.flush())
                .map_err(write_err(path))
        }
        None => {
            let mut buf = Vec::new();
            write_jsonl(&mut buf, preds).map_err(|e| CliError::Internal(e.to_string()))?;
            emit(&String::from_utf8(buf).expect("JSON output is UTF-8"))
        }
    }
}

pub fn run_batch(cfg: &EngineConfig, queries: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let queries = read_queries(open(queries)?)?;
    if queries.is_empty() {
        return Err(CliError::Input("query file is empty".into()));
    }
    let engine = build_engine(cfg)?;
    let runs = run_all(&engine, &queries, cfg.parallelism)?;
    let preds: Vec<PredictionRecord> = runs.iter().map(PredictionRecord::from_run).collect();
    let accepted = preds.iter().filter(|p| p.applet.is_some()).count();
    eprintln!("{} queries: {accepted} accepted, {} exhausted", preds.len(), preds.len() - accepted);
    write_predictions(out, &preds)
}

pub struct EvalArgs<'a> {
    pub gold: &'a Path,
    pub predictions: Option<&'a Path>,
    pub save_predictions: Option<&'a Path>,
    pub service_level: bool,
    pub cutoffs: Vec<usize>,
    pub out: Option<&'a Path>,
}

pub fn eval(cfg: &EngineConfig, args: EvalArgs<'_>) -> Result<(), CliError> {
    let catalog_path = cfg.catalog_path()?;
    let golds: Vec<GoldRecord> = read_jsonl(open(args.gold)?).map_err(|e| CliError::input(args.gold.display(), e))?;
    let (preds, catalog) = match args.predictions {
        Some(path) => {
            let preds: Vec<PredictionRecord> = read_jsonl(open(path)?).map_err(|e| CliError::input(path.display(), e))?;
            (preds, load_catalog(catalog_path)?)
        }
        None => {
            let engine = build_engine(cfg)?;
            let queries: Vec<String> = golds.iter().map(|g| g.query.clone()).collect();
            let runs = run_all(&engine, &queries, cfg.parallelism)?;
            let preds: Vec<PredictionRecord> = runs.iter().map(PredictionRecord::from_run).collect();
            if let Some(path) = args.save_predictions {
                write_predictions(Some(path), &preds)?;
            }
            (preds, engine.catalog().clone())
        }
    };
    let options = EvalOptions {
        ks: args.cutoffs,
        level: if args.service_level {
            MatchLevel::Service
        } else {
            MatchLevel::Function
        },
    };
    let report = evaluate_run(&preds, &golds, &catalog, &options)?;
    if let Some(path) = args.out {
        let mut out = create(path)?;
        writeln!(out, "{}", report.to_json())
            .and_then(|_| out.flush())
            .map_err(write_err(path))?;
    }
    emit(&report.to_table())
}

/// Re-validates a previously written report's metric invariants.
pub fn check_report(path: &Path) -> Result<(), CliError> {
    let report: MetricsReport =
        serde_json::from_reader(open(path)?).map_err(|e| CliError::input(path.display(), e))?;
    report.validate()?;
    emit(&format!("{}: all metric invariants hold\n", path.display()))
}

pub fn default_cutoffs() -> Vec<usize> {
    EvalOptions::default().ks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queries_accept_plain_and_json_lines() {
        let input = "turn on the lights\n\n{\"query\": \"save photos\", \"true_trigger_id\": \"x\"}\n  padded  \n";
        assert_eq!(
            read_queries(input.as_bytes()).unwrap(),
            vec!["turn on the lights", "save photos", "padded"]
        );
    }

    #[test]
    fn malformed_json_query_line_is_input_error() {
        let err = read_queries("{\"q\": 1}\n".as_bytes()).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
