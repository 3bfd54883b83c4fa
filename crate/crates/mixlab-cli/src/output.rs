//! Output plumbing: CSV/JSON selection and the `--out` redirection.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

pub struct Sink {
    writer: Box<dyn Write>,
}

impl Sink {
    pub fn open(out: Option<&PathBuf>) -> Result<Sink> {
        let writer: Box<dyn Write> = match out {
            Some(path) => Box::new(File::create(path)?),
            None => Box::new(io::stdout()),
        };
        Ok(Sink { writer })
    }

    /// Writes one CSV record; fields containing separators or quotes are
    /// quoted.
    pub fn csv_row(&mut self, fields: &[String]) -> Result<()> {
        let escaped: Vec<String> = fields
            .iter()
            .map(|f| {
                if f.contains(',') || f.contains('"') || f.contains('\n') {
                    format!("\"{}\"", f.replace('"', "\"\""))
                } else {
                    f.clone()
                }
            })
            .collect();
        writeln!(self.writer, "{}", escaped.join(","))?;
        Ok(())
    }

    pub fn json_line(&mut self, value: &serde_json::Value) -> Result<()> {
        writeln!(self.writer, "{value}")?;
        Ok(())
    }
}

/// Renders a float for CSV: shortest round-trip representation.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// JSON value for a float, mapping the infinities to strings so the report
/// stays loss-free.
pub fn json_num(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else if v.is_infinite() && v > 0.0 {
        serde_json::Value::String("inf".into())
    } else if v.is_infinite() {
        serde_json::Value::String("-inf".into())
    } else {
        serde_json::Value::String("nan".into())
    }
}
