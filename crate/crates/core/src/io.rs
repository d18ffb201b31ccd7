//! JSON and CSV file formats.
//!
//! Models, datasets, context lists, reports and traces are JSON; search
//! traces and evaluation results additionally have flat CSV forms meant to
//! be plotted directly.

use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::model::{Context, Dataset, MilpModel};
use crate::search::SearchTrace;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(io_err(dir)),
        _ => Ok(()),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes pretty-printed JSON with a trailing newline. Floats are written in
/// shortest round-trip form, so reading the file back yields identical bits.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_model(path: &Path) -> Result<MilpModel> {
    let model: MilpModel = read_json(path)?;
    model.validate()?;
    Ok(model)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let data: Dataset = read_json(path)?;
    data.validate()?;
    Ok(data)
}

pub fn read_contexts(path: &Path) -> Result<Vec<Context>> {
    read_json(path)
}

/// One row of the trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub seconds: f64,
    pub zero_one: f64,
    pub surrogate: f64,
    pub lambda: f64,
    pub action: String,
}

pub fn trace_rows(trace: &SearchTrace) -> Vec<TraceRow> {
    trace
        .iterations
        .iter()
        .map(|e| TraceRow {
            iter: e.iter,
            seconds: e.seconds,
            zero_one: e.zero_one,
            surrogate: e.surrogate,
            lambda: e.lambda,
            action: e.action.as_str().to_string(),
        })
        .collect()
}

pub fn write_trace_csv(path: &Path, trace: &SearchTrace) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    let rows = trace_rows(trace);
    if rows.is_empty() {
        w.write_record(["iter", "seconds", "zero_one", "surrogate", "lambda", "action"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// One row of the evaluation results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub strategy: String,
    pub seed: String,
    pub cutoff: String,
    pub recall: f64,
    pub precision: f64,
    pub infeasibility: f64,
    pub regret: f64,
}

impl ReportRow {
    /// A row carrying only its labels; metrics are filled in by [`fill`](Self::fill).
    pub fn labels(strategy: impl Into<String>, seed: impl Into<String>, cutoff: impl Into<String>) -> Self {
        Self {
            strategy: strategy.into(),
            seed: seed.into(),
            cutoff: cutoff.into(),
            recall: f64::NAN,
            precision: f64::NAN,
            infeasibility: f64::NAN,
            regret: f64::NAN,
        }
    }

    pub fn fill(&mut self, report: &EvalReport) {
        self.recall = report.recall;
        self.precision = report.precision;
        self.infeasibility = report.infeasibility;
        self.regret = report.mean_regret;
    }

    pub fn new(strategy: impl Into<String>, seed: impl Into<String>, cutoff: impl Into<String>, report: &EvalReport) -> Self {
        Self {
            strategy: strategy.into(),
            seed: seed.into(),
            cutoff: cutoff.into(),
            recall: report.recall,
            precision: report.precision,
            infeasibility: report.infeasibility,
            regret: report.mean_regret,
        }
    }
}

/// Appends serialized rows to a CSV file, writing the header only when the
/// file is new or empty.
pub fn append_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    ensure_parent(path)?;
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Appends one line to a plain-text log, creating the file if needed.
pub fn append_line(path: &Path, line: &str) -> Result<()> {
    ensure_parent(path)?;
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    writeln!(file, "{line}").map_err(io_err(path))
}
