//! Versioned CSV and JSON tables.
//!
//! A CSV file starts with two comment lines, the schema version and the run
//! configuration as one JSON object, followed by a header row:
//!
//! ```text
//! # dsff-lab v1
//! # config: {"command":"estimate",...}
//! theta,abs_tau,t,s,...
//! ```
//!
//! Missing values (for example the standard error of a single sample) are
//! empty cells. The `contact` column is the constant `1/N`; it is part of
//! `k_mean`, not an extra term.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA: &str = "dsff-lab v1";
const CONFIG_PREFIX: &str = "# config: ";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub theta: f64,
    pub abs_tau: f64,
    pub t: f64,
    pub s: f64,
    pub k_mean: f64,
    pub k_stderr: Option<f64>,
    pub disconnected_unbiased: Option<f64>,
    pub connected: Option<f64>,
    pub contact: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryRow {
    pub theta: f64,
    pub abs_tau: f64,
    pub t: f64,
    pub s: f64,
    pub k_total: f64,
    pub contact: Option<f64>,
    pub disconnected: Option<f64>,
    pub connected: Option<f64>,
    pub e_value: Option<f64>,
    pub v_value: Option<f64>,
    pub e_leading: Option<f64>,
    pub e_laplacian: Option<f64>,
    pub e_kappa4: Option<f64>,
    pub e_real_axis: Option<f64>,
    pub v_gradient: Option<f64>,
    pub v_series: Option<f64>,
    pub v_kappa4: Option<f64>,
    pub v_real_ramp: Option<f64>,
    pub validity_warning: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub theta: f64,
    pub abs_tau: f64,
    pub t: f64,
    pub s: f64,
    pub k_mean: f64,
    pub k_stderr: Option<f64>,
    pub k_total: f64,
    /// `(k_mean - k_total) / k_stderr`
    pub z: Option<f64>,
    pub connected: Option<f64>,
    /// `k_total - disconnected`, the theory's variance part.
    pub theory_connected: Option<f64>,
}

#[derive(Serialize)]
struct JsonTable<'a, C: Serialize, R: Serialize> {
    schema: &'static str,
    config: &'a C,
    rows: &'a [R],
}

pub fn write_csv<C: Serialize, R: Serialize>(mut out: impl Write, config: &C, rows: &[R]) -> io::Result<()> {
    writeln!(out, "# {SCHEMA}")?;
    writeln!(out, "{CONFIG_PREFIX}{}", serde_json::to_string(config)?)?;
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}

pub fn write_json<C: Serialize, R: Serialize>(mut out: impl Write, config: &C, rows: &[R]) -> io::Result<()> {
    let table = JsonTable {
        schema: SCHEMA,
        config,
        rows,
    };
    serde_json::to_writer_pretty(&mut out, &table)?;
    writeln!(out)
}

/// Reads a table written by [`write_csv`], returning the echoed config and
/// the rows.
pub fn read_csv<R: DeserializeOwned>(path: &Path) -> Result<(serde_json::Value, Vec<R>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(&format!("# {SCHEMA}")) {
        return Err(CliError::format(path, format!("missing '# {SCHEMA}' header line")));
    }
    let config = lines
        .next()
        .and_then(|l| l.strip_prefix(CONFIG_PREFIX))
        .ok_or_else(|| CliError::format(path, "missing '# config:' line"))?;
    let config: serde_json::Value =
        serde_json::from_str(config).map_err(|e| CliError::format(path, format!("config line: {e}")))?;
    let body: String = lines.flat_map(|l| [l, "\n"]).collect();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let rows = reader
        .deserialize()
        .enumerate()
        .map(|(k, r)| r.map_err(|e| CliError::format(path, format!("row {}: {e}", k + 1))))
        .collect::<Result<Vec<R>, _>>()?;
    Ok((config, rows))
}
