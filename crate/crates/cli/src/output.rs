use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const MANIFEST_MARKER: &str = "# projsq manifest";
/// Manifest entries that describe the run rather than parameterize it.
pub const META_KEYS: &[&str] = &["tool", "version", "timestamp", "command"];
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Columns that must lie in `[0, 1]`.
const UNIT_COLUMNS: &[&str] = &["fidelity", "f_min", "f_max", "f_mss", "probability"];
const UNIT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub command: String,
    pub params: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: "projsq".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            command: command.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// `v` with 12 significant digits, trailing zeros trimmed.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    let digits = SIGNIFICANT_DIGITS as i32;
    if (-5..digits).contains(&exp) {
        let decimals = (digits - 1 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            return s.trim_end_matches('0').trim_end_matches('.').to_string();
        }
        return s;
    }
    let s = format!("{v:.prec$e}", prec = SIGNIFICANT_DIGITS - 1);
    let (mant, e) = s.split_once('e').expect("exponent form");
    let mant = if mant.contains('.') {
        mant.trim_end_matches('0').trim_end_matches('.')
    } else {
        mant
    };
    format!("{mant}e{e}")
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(v) => format_sig(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => format_sig(*v)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutputTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl OutputTable {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Rejects non-finite numbers and probability-like values outside `[0, 1]`.
    pub fn validate(&self) -> CliResult<()> {
        for row in &self.rows {
            for (col, cell) in self.columns.iter().zip(row) {
                if let Cell::Num(v) = cell {
                    if !v.is_finite() {
                        return Err(CliError::Numerical(format!("non-finite value in column {col}")));
                    }
                    if UNIT_COLUMNS.contains(col) && !(-UNIT_SLACK..=1.0 + UNIT_SLACK).contains(v) {
                        return Err(CliError::Numerical(format!("{col} = {v} outside [0, 1]")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(value: Option<&str>, out: Option<&Path>) -> CliResult<Self> {
        match value {
            Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            Some(other) => Err(CliError::usage(format!("unknown format `{other}`; use csv or json"))),
            None => Ok(match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
                Some("json") => Format::Json,
                _ => Format::Csv,
            }),
        }
    }
}

pub fn render(table: &OutputTable, manifest: &RunManifest, format: Format) -> CliResult<Vec<u8>> {
    table.validate()?;
    let mut buf = Vec::new();
    match format {
        Format::Csv => {
            writeln!(buf, "{MANIFEST_MARKER}").expect("vec write");
            let meta = [
                ("tool", &manifest.tool),
                ("version", &manifest.version),
                ("timestamp", &manifest.timestamp),
                ("command", &manifest.command),
            ];
            for (k, v) in meta.into_iter().chain(manifest.params.iter().map(|(k, v)| (k.as_str(), v))) {
                writeln!(buf, "# {k} = {v}").expect("vec write");
            }
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::text))?;
            }
            w.flush().map_err(|e| CliError::Output(e.to_string()))?;
        }
        Format::Json => {
            let results: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = table
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(k, c)| (k.to_string(), c.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            let doc = serde_json::json!({ "manifest": manifest, "results": results });
            serde_json::to_writer_pretty(&mut buf, &doc)?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

pub fn emit(table: &OutputTable, manifest: &RunManifest, format: Format, out: Option<&Path>) -> CliResult<()> {
    let bytes = render(table, manifest, format)?;
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::io(path.display().to_string(), e)),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::io("stdout", e)),
    }
}
