//! Run records and their on-disk layout.
//!
//! `emit` writes into one directory:
//!
//! * `record.json`: the whole [`RunRecord`] except JSON Lines streams;
//! * `<table>.csv` for every table, header row first, columns in the order
//!   listed in the table;
//! * `<document>.json` for side documents such as the ensemble manifest;
//! * `<stream>.jsonl` for per-sample or per-step streams.
//!
//! Every file ends with a newline and re-emitting a record rewrites the same
//! bytes.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{io_error, HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn to_csv_field(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_finite() => serde_json::to_string(x).expect("finite float"),
            Cell::Float(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width of table {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let wrap = |source| HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(wrap)?;
        w.write_record(&self.columns).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv_field))
                .map_err(wrap)?;
        }
        w.flush().map_err(io_error(path))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Document {
    pub name: String,
    pub content: Value,
}

/// Emitted as `<name>.jsonl`, one value per line; not repeated in
/// `record.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stream {
    pub name: String,
    pub lines: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Payload {
    pub summary: Map<String, Value>,
    pub tables: Vec<Table>,
    pub documents: Vec<Document>,
    #[serde(skip)]
    pub streams: Vec<Stream>,
}

impl Payload {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn summarize(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(
            key.to_string(),
            serde_json::to_value(value).expect("summary value serializes"),
        );
    }
}

/// A pass/fail statement about one measured quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    /// The acceptance condition, e.g. `<= 1e-10` or `in [-1.8, -1.2]`.
    pub condition: String,
}

impl Verdict {
    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            pass: measured <= limit,
            measured,
            condition: format!("<= {limit:e}"),
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            pass: measured >= limit,
            measured,
            condition: format!(">= {limit}"),
        }
    }

    pub fn below(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            pass: measured < limit,
            measured,
            condition: format!("< {limit}"),
        }
    }

    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            pass: measured >= lo && measured <= hi,
            measured,
            condition: format!("in [{lo}, {hi}]"),
        }
    }

    pub fn holds(name: impl Into<String>, pass: bool, condition: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            measured: if pass { 1.0 } else { 0.0 },
            condition: condition.into(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: measured {:e}, required {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.condition
        )
    }
}

/// The master seed of one family of draws; sample `i` used stream `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRecord {
    pub role: String,
    pub master_seed: u64,
    pub streams: String,
}

impl SeedRecord {
    pub fn range(role: &str, master_seed: u64, count: usize) -> Self {
        Self {
            role: role.to_string(),
            master_seed,
            streams: format!("0..{count}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub experiment: String,
    /// The validated configuration with every default filled in; feeding it
    /// back to `parse_config` reproduces the run.
    pub config: Value,
    pub generator: String,
    pub seeds: Vec<SeedRecord>,
    pub wall_time_seconds: f64,
    pub payload: Payload,
    pub verdicts: Vec<Verdict>,
}

impl RunRecord {
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// The deterministic part of the record: everything except the wall time,
    /// plus the streams.
    pub fn payload_bytes(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec(&(&self.config, &self.seeds, &self.payload, &self.verdicts))
            .expect("record serializes");
        for s in &self.payload.streams {
            v.extend(serde_json::to_vec(s).expect("stream serializes"));
        }
        v
    }
}

pub const RECORD_FILE: &str = "record.json";

fn write_text(path: &Path, mut text: String) -> Result<()> {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    fs::write(path, text).map_err(io_error(path))
}

/// Writes `record` into `dir`, creating it if needed.
pub fn emit(record: &RunRecord, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    write_text(
        &dir.join(RECORD_FILE),
        serde_json::to_string_pretty(record)?,
    )?;
    for t in &record.payload.tables {
        t.write_csv(&dir.join(format!("{}.csv", t.name)))?;
    }
    for d in &record.payload.documents {
        write_text(
            &dir.join(format!("{}.json", d.name)),
            serde_json::to_string_pretty(&d.content)?,
        )?;
    }
    for s in &record.payload.streams {
        let mut text = String::new();
        for line in &s.lines {
            text.push_str(&serde_json::to_string(line)?);
            text.push('\n');
        }
        let path = dir.join(format!("{}.jsonl", s.name));
        fs::write(&path, text).map_err(io_error(&path))?;
    }
    Ok(())
}
