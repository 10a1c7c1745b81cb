//! Report writers.
//!
//! JSON documents have the shape `{"config": …, "result": …, "version": …}`
//! with keys sorted at every level and exact rationals written as `"p/q"`.
//! CSV files carry one row per grid point with the fixed header
//! `n,x,value,target,abs_err,rel_err,rate`; cells that do not apply are empty.
//! Since CSV cannot embed the configuration, it goes to a `<path>.meta.json`
//! sidecar, or to stderr when the CSV itself goes to stdout.

use std::fs;
use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{OutputFormat, RunConfig};
use crate::CliError;

pub const CSV_HEADER: [&str; 7] = ["n", "x", "value", "target", "abs_err", "rel_err", "rate"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow {
    pub n: f64,
    pub x: Option<f64>,
    pub value: f64,
    pub target: Option<f64>,
    pub abs_err: Option<f64>,
    pub rel_err: Option<f64>,
    pub rate: Option<f64>,
}

impl CsvRow {
    /// A row whose error columns are filled in when a target exists.
    pub fn compare(n: f64, x: Option<f64>, value: f64, target: Option<f64>, rate: Option<f64>) -> Self {
        let abs_err = target.map(|t| (value - t).abs());
        let rel_err = match (abs_err, target) {
            (Some(e), Some(t)) if t != 0.0 => Some(e / t.abs()),
            _ => None,
        };
        CsvRow {
            n,
            x,
            value,
            target,
            abs_err,
            rel_err,
            rate,
        }
    }
}

pub fn version_string() -> String {
    format!("bds-core {}", bds_core::VERSION)
}

/// The config plus version stamp that accompanies every artifact.
pub fn metadata(cfg: &RunConfig) -> Result<Value, CliError> {
    Ok(json!({
        "config": serde_json::to_value(cfg).map_err(CliError::internal)?,
        "version": version_string(),
    }))
}

pub fn json_document(cfg: &RunConfig, result: Value) -> Result<String, CliError> {
    let mut doc = metadata(cfg)?;
    doc["result"] = result;
    let mut text = serde_json::to_string_pretty(&doc).map_err(CliError::internal)?;
    text.push('\n');
    Ok(text)
}

pub fn csv_text(rows: &[CsvRow]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(CliError::internal)?;
    for row in rows {
        w.serialize(row).map_err(CliError::internal)?;
    }
    let bytes = w.into_inner().map_err(CliError::internal)?;
    String::from_utf8(bytes).map_err(CliError::internal)
}

fn write_file(path: &str, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {path}: {e}")))
}

/// Writes the report in the configured format and destination.
pub fn emit(cfg: &RunConfig, result: Value, rows: &[CsvRow]) -> Result<(), CliError> {
    match cfg.output_format {
        OutputFormat::Json => {
            let text = json_document(cfg, result)?;
            match &cfg.output_path {
                Some(path) => write_file(path, &text),
                None => io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| CliError::io(e.to_string())),
            }
        }
        OutputFormat::Csv => {
            let table = csv_text(rows)?;
            let mut meta = serde_json::to_string_pretty(&metadata(cfg)?).map_err(CliError::internal)?;
            meta.push('\n');
            match &cfg.output_path {
                Some(path) => {
                    write_file(path, &table)?;
                    write_file(&format!("{path}.meta.json"), &meta)
                }
                None => {
                    eprint!("{meta}");
                    io::stdout()
                        .write_all(table.as_bytes())
                        .map_err(|e| CliError::io(e.to_string()))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compare_fills_errors() {
        let r = CsvRow::compare(8.0, Some(1.0), 2.5, Some(2.0), None);
        assert_eq!(r.abs_err, Some(0.5));
        assert_eq!(r.rel_err, Some(0.25));
        let r = CsvRow::compare(8.0, None, 2.5, Some(0.0), None);
        assert_eq!(r.rel_err, None);
        let r = CsvRow::compare(8.0, None, 2.5, None, Some(-1.0));
        assert_eq!((r.abs_err, r.rate), (None, Some(-1.0)));
    }

    #[test]
    fn csv_leaves_missing_cells_empty() {
        let rows = [CsvRow::compare(16.0, None, 0.5, None, None)];
        let text = csv_text(&rows).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,x,value,target,abs_err,rel_err,rate"));
        assert_eq!(lines.next(), Some("16.0,,0.5,,,,"));
    }

    #[test]
    fn json_keys_are_sorted() {
        let v = json!({"zeta": 1, "alpha": {"b": 2, "a": 1}});
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"alpha":{"a":1,"b":2},"zeta":1}"#);
    }
}
