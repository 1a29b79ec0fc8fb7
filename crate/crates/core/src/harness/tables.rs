//! CSV artifacts. Each file has a fixed header that is checked on load.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    pub snr_db: f64,
    pub rmse_eesm: f64,
    pub rmse_nn: f64,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputRow {
    pub snr_db: f64,
    pub tput_eesm: f64,
    pub tput_nn: f64,
    pub tput_genie: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRow {
    pub n: usize,
    pub avg_snr_db: f64,
    pub k_eesm: usize,
    pub k_nn: usize,
    /// 0 when every configuration failed.
    pub k_genie: usize,
    pub tput_eesm: f64,
    pub tput_nn: f64,
    pub tput_genie: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRow {
    pub epoch: usize,
    pub train_ce: f64,
    pub validation_ce: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub k: usize,
    pub code_rate: f64,
    pub beta: f64,
    pub objective: f64,
    pub observations: usize,
}

pub trait CsvSchema: Serialize + DeserializeOwned {
    const COLUMNS: &'static [&'static str];
}

impl CsvSchema for RmseRow {
    const COLUMNS: &'static [&'static str] = &["snr_db", "rmse_eesm", "rmse_nn", "frames"];
}

impl CsvSchema for ThroughputRow {
    const COLUMNS: &'static [&'static str] = &["snr_db", "tput_eesm", "tput_nn", "tput_genie"];
}

impl CsvSchema for DecisionRow {
    const COLUMNS: &'static [&'static str] = &[
        "n",
        "avg_snr_db",
        "k_eesm",
        "k_nn",
        "k_genie",
        "tput_eesm",
        "tput_nn",
        "tput_genie",
    ];
}

impl CsvSchema for TrainLogRow {
    const COLUMNS: &'static [&'static str] = &["epoch", "train_ce", "validation_ce"];
}

impl CsvSchema for CalibrationRow {
    const COLUMNS: &'static [&'static str] =
        &["k", "code_rate", "beta", "objective", "observations"];
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    }
}

pub fn write_csv<T: CsvSchema>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    w.write_record(T::COLUMNS).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: CsvSchema>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if !headers.iter().eq(T::COLUMNS.iter().copied()) {
        return Err(Error::Data(format!(
            "{}: expected columns {}, found {}",
            path.display(),
            T::COLUMNS.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| csv_error(path, e)))
        .collect()
}

/// Aligned plain-text rendering of any CSV file.
pub fn pretty_table(path: &Path) -> Result<String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers: Vec<String> = r
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = vec![headers];
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        rows.push(rec.iter().map(pretty_cell).collect());
    }
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(String::len)
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&rule.join("  "));
            out.push('\n');
        }
    }
    Ok(out)
}

fn pretty_cell(c: &str) -> String {
    match c.parse::<f64>() {
        Ok(v) if c.contains('.') || c.contains('e') => crate::textfmt::fmt_sig(v, 5),
        _ => c.to_string(),
    }
}
