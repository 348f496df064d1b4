//! On-disk formats: JSON data files for matrices and vectors, reports as CSV
//! or JSON, and JSON configuration files.
//!
//! Floats are written in the shortest representation that parses back to
//! the same bits, so every file round-trips exactly.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::model::{
    Column, ColumnKind, ExperimentReport, Provenance, SenseMatrix, Signal, Value,
};

pub const KIND_MATRIX: &str = "matrix";
pub const KIND_SIGNAL: &str = "signal";
pub const KIND_VECTOR: &str = "vector";

/// A matrix, signal or vector: `m x n` entries stored row-major. Vectors use
/// `n = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFile {
    pub kind: String,
    pub m: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
    pub data: Vec<f64>,
}

impl DataFile {
    pub fn from_matrix(phi: &SenseMatrix) -> Self {
        let (seed, stream) = match phi.provenance() {
            Provenance::Gaussian { seed, stream } => (Some(seed), Some(stream)),
            Provenance::Custom => (None, None),
        };
        DataFile {
            kind: KIND_MATRIX.into(),
            m: phi.rows(),
            n: phi.cols(),
            seed,
            stream,
            data: phi.data().to_vec(),
        }
    }

    pub fn from_vector(kind: &str, values: &[f64], seed: Option<u64>) -> Self {
        DataFile {
            kind: kind.into(),
            m: values.len(),
            n: 1,
            seed,
            stream: None,
            data: values.to_vec(),
        }
    }

    fn validate(&self) -> Result<()> {
        if ![KIND_MATRIX, KIND_SIGNAL, KIND_VECTOR].contains(&self.kind.as_str()) {
            return Err(Error::format(format!(
                "unknown kind {:?}; expected matrix, signal or vector",
                self.kind
            )));
        }
        if self.m == 0 || self.n == 0 {
            return Err(Error::format("m and n must be positive"));
        }
        if self.kind != KIND_MATRIX && self.n != 1 {
            return Err(Error::format(format!("a {} must have n = 1", self.kind)));
        }
        if self.m.checked_mul(self.n) != Some(self.data.len()) {
            return Err(Error::format(format!(
                "data has {} entries, expected m*n = {}*{}",
                self.data.len(),
                self.m,
                self.n
            )));
        }
        Ok(())
    }

    pub fn into_matrix(self) -> Result<SenseMatrix> {
        if self.kind != KIND_MATRIX {
            return Err(Error::format(format!("expected a matrix file, found kind {:?}", self.kind)));
        }
        let provenance = match (self.seed, self.stream) {
            (Some(seed), Some(stream)) => Provenance::Gaussian { seed, stream },
            _ => Provenance::Custom,
        };
        SenseMatrix::with_provenance(self.m, self.n, self.data, provenance)
    }

    /// Entries of a signal or vector file.
    pub fn into_vector(self) -> Result<Vec<f64>> {
        if self.kind == KIND_MATRIX && self.n != 1 {
            return Err(Error::format("expected a vector file, found a matrix"));
        }
        Ok(self.data)
    }

    pub fn into_signal(self) -> Result<Signal> {
        Signal::new(self.into_vector()?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("data files always serialize");
        s.push('\n');
        s
    }
}

pub fn parse_data_file(text: &str) -> Result<DataFile> {
    let d: DataFile = serde_json::from_str(text).map_err(|e| Error::format(e.to_string()))?;
    d.validate()?;
    Ok(d)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn read_data_file(path: &Path) -> Result<DataFile> {
    with_path(path, parse_data_file(&read_text(path)?))
}

pub fn read_matrix(path: &Path) -> Result<SenseMatrix> {
    with_path(path, read_data_file(path)?.into_matrix())
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    with_path(path, read_data_file(path)?.into_vector())
}

/// Parses a JSON config, rejecting unknown keys (given `deny_unknown_fields`
/// on `T`).
pub fn parse_config<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::format(format!("config: {e}")))
}

/// Report file flavours.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::invalid("format", format!("unknown report format {other:?}"))),
        }
    }
}

impl ReportFormat {
    /// Picks the format from a file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        path.extension()
            .and_then(|e| e.to_str())
            .ok_or_else(|| Error::invalid("out", format!("{} has no extension", path.display())))?
            .parse()
    }

    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

fn real_text(v: f64) -> String {
    format!("{v:?}")
}

/// CSV text with a header row; reals in shortest round-trip form, so every
/// real cell contains `.`, `e`, `inf` or `NaN` and is distinguishable from
/// an integer cell.
pub fn report_to_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::format(e.to_string());
    w.write_record(report.columns().iter().map(|c| c.name.as_str()))
        .map_err(csv_err)?;
    for row in report.rows() {
        w.write_record(row.iter().map(|v| match *v {
            Value::Real(x) => real_text(x),
            Value::Integer(i) => i.to_string(),
            Value::Boolean(b) => b.to_string(),
        }))
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::format(e.to_string()))
}

fn looks_integer(s: &str) -> bool {
    s.parse::<i64>().is_ok()
}

/// Reads CSV produced by [`report_to_csv`]. CSV carries no metadata, so the
/// experiment name and seed are supplied by the caller; column types are
/// inferred from the cells (all-`true`/`false` columns are boolean, columns
/// of plain integers are integer, everything else is real; a header-only
/// file yields real columns).
pub fn report_from_csv(text: &str, experiment_name: &str, master_seed: u64) -> Result<ExperimentReport> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::format(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut cells: Vec<Vec<String>> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::format(e.to_string()))?;
        cells.push(rec.iter().map(str::to_owned).collect());
    }
    let kinds: Vec<ColumnKind> = (0..header.len())
        .map(|j| {
            if cells.is_empty() {
                ColumnKind::Real
            } else if cells.iter().all(|row| row[j] == "true" || row[j] == "false") {
                ColumnKind::Boolean
            } else if cells.iter().all(|row| looks_integer(&row[j])) {
                ColumnKind::Integer
            } else {
                ColumnKind::Real
            }
        })
        .collect();
    let columns = header
        .iter()
        .zip(&kinds)
        .map(|(name, &kind)| Column {
            name: name.clone(),
            kind,
        })
        .collect();
    let mut report = ExperimentReport::new(experiment_name, master_seed, columns)?;
    for (i, row) in cells.iter().enumerate() {
        let values = row
            .iter()
            .zip(&kinds)
            .map(|(cell, kind)| parse_cell(cell, *kind).map_err(|e| Error::format(format!("row {}: {e}", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        report.push_row(values)?;
    }
    Ok(report)
}

fn parse_cell(cell: &str, kind: ColumnKind) -> std::result::Result<Value, String> {
    match kind {
        ColumnKind::Boolean => cell.parse().map(Value::Boolean).map_err(|_| format!("bad boolean {cell:?}")),
        ColumnKind::Integer => cell.parse().map(Value::Integer).map_err(|_| format!("bad integer {cell:?}")),
        ColumnKind::Real => cell.parse().map(Value::Real).map_err(|_| format!("bad real {cell:?}")),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct JsonReport {
    schema_version: u32,
    experiment_name: String,
    master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    created_at_unix: Option<u64>,
    columns: Vec<Column>,
    rows: Vec<Vec<Json>>,
}

fn real_to_json(v: f64) -> Json {
    if v.is_finite() {
        serde_json::Number::from_f64(v).map_or(Json::Null, Json::Number)
    } else {
        Json::String(real_text(v))
    }
}

/// Self-describing JSON report; non-finite reals are written as the strings
/// `"NaN"`, `"inf"` and `"-inf"`.
pub fn report_to_json(report: &ExperimentReport, created_at_unix: Option<u64>) -> String {
    let doc = JsonReport {
        schema_version: report.schema_version(),
        experiment_name: report.experiment_name().to_owned(),
        master_seed: report.master_seed(),
        created_at_unix,
        columns: report.columns().to_vec(),
        rows: report
            .rows()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| match *v {
                        Value::Real(x) => real_to_json(x),
                        Value::Integer(i) => Json::from(i),
                        Value::Boolean(b) => Json::Bool(b),
                    })
                    .collect()
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("reports always serialize");
    s.push('\n');
    s
}

pub fn report_from_json(text: &str) -> Result<ExperimentReport> {
    let doc: JsonReport = serde_json::from_str(text).map_err(|e| Error::format(e.to_string()))?;
    let mut report = ExperimentReport::with_version(
        doc.schema_version,
        &doc.experiment_name,
        doc.master_seed,
        doc.columns,
    )?;
    let kinds: Vec<ColumnKind> = report.columns().iter().map(|c| c.kind).collect();
    for (i, row) in doc.rows.into_iter().enumerate() {
        if row.len() != kinds.len() {
            return Err(Error::format(format!(
                "row {} has {} cells, expected {}",
                i + 1,
                row.len(),
                kinds.len()
            )));
        }
        let values = row
            .iter()
            .zip(&kinds)
            .map(|(cell, kind)| {
                let v = match (kind, cell) {
                    (ColumnKind::Real, Json::Number(n)) => n.as_f64().map(Value::Real),
                    (ColumnKind::Real, Json::String(s)) => s
                        .parse::<f64>()
                        .ok()
                        .filter(|x| !x.is_finite())
                        .map(Value::Real),
                    (ColumnKind::Integer, Json::Number(n)) => n.as_i64().map(Value::Integer),
                    (ColumnKind::Boolean, Json::Bool(b)) => Some(Value::Boolean(*b)),
                    _ => None,
                };
                v.ok_or_else(|| Error::format(format!("row {}: cell {cell} is not a valid {kind:?}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        report.push_row(values)?;
    }
    Ok(report)
}

/// Parses either report flavour; the name and seed are only used for CSV.
pub fn parse_report(text: &str, format: ReportFormat, name: &str, seed: u64) -> Result<ExperimentReport> {
    match format {
        ReportFormat::Csv => report_from_csv(text, name, seed),
        ReportFormat::Json => report_from_json(text),
    }
}
