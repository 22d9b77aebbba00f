//! Report emission: CSV for sampled curves, JSON for single records.
//! Floats print with 17 significant digits; lines end with LF.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use streamframe::R3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => bail!("unknown format `{other}`, expected json or csv"),
        }
    }
}

pub fn parse_format(s: Option<String>, default: Format) -> Result<Format> {
    s.map(|v| v.parse()).transpose().map(|f| f.unwrap_or(default))
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Uniform numeric table with named columns.
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                out.push_str(&self.headers.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let records: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut obj = serde_json::Map::new();
                        for (key, &v) in self.headers.iter().zip(row) {
                            obj.insert(key.clone(), json!(v));
                        }
                        Value::Object(obj)
                    })
                    .collect();
                let mut text = serde_json::to_string_pretty(&records).expect("plain numbers");
                text.push('\n');
                text
            }
        }
    }
}

pub fn vec3(v: &R3) -> Value {
    json!([v.x, v.y, v.z])
}

pub fn render_record(record: Value) -> String {
    let mut text = serde_json::to_string_pretty(&record).expect("plain record");
    text.push('\n');
    text
}

pub fn write_out(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("writing report to {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}
