//! Report records and their JSON / CSV encodings.
//!
//! Floats are written as `{:.16e}` (17 significant digits); non-finite values
//! become the strings `"inf"`, `"-inf"` and `"nan"`.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use super::config::{Format, Task};

pub const SCHEMA_VERSION: u32 = 1;

/// A JSON-like value with ordered maps.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<Value>),
    Map(Vec<(String, Value)>),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

impl<T: Into<Value> + Clone> From<&[T]> for Value {
    fn from(v: &[T]) -> Self {
        Value::List(v.iter().cloned().map(Into::into).collect())
    }
}

impl<T: Into<Value>> From<Vec<T>> for Value {
    fn from(v: Vec<T>) -> Self {
        Value::List(v.into_iter().map(Into::into).collect())
    }
}

/// Builds a map from `(key, value)` pairs.
pub fn map<K: Into<String>>(pairs: impl IntoIterator<Item = (K, Value)>) -> Value {
    Value::Map(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

fn escape(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

impl Value {
    fn write_json(&self, out: &mut String, indent: usize) {
        let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat(' ').take(2 * n));
        match self {
            Value::Null => out.push_str("null"),
            Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Value::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Value::Float(v) if v.is_finite() => out.push_str(&format_float(*v)),
            Value::Float(v) => escape(&format_float(*v), out),
            Value::Str(s) => escape(s, out),
            Value::List(items) if items.iter().all(|v| !matches!(v, Value::List(_) | Value::Map(_))) => {
                out.push('[');
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    v.write_json(out, indent);
                }
                out.push(']');
            }
            Value::List(items) => {
                out.push_str("[\n");
                for (i, v) in items.iter().enumerate() {
                    pad(out, indent + 1);
                    v.write_json(out, indent + 1);
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push(']');
            }
            Value::Map(pairs) if pairs.is_empty() => out.push_str("{}"),
            Value::Map(pairs) => {
                out.push_str("{\n");
                for (i, (k, v)) in pairs.iter().enumerate() {
                    pad(out, indent + 1);
                    escape(k, out);
                    out.push_str(": ");
                    v.write_json(out, indent + 1);
                    out.push_str(if i + 1 < pairs.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push('}');
            }
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = String::new();
        self.write_json(&mut s, 0);
        s.push('\n');
        s
    }

    /// Cell text for CSV output.
    pub fn to_cell(&self) -> String {
        match self {
            Value::Null => String::new(),
            Value::Bool(b) => b.to_string(),
            Value::Int(i) => i.to_string(),
            Value::Float(v) => format_float(*v),
            Value::Str(s) => s.clone(),
            Value::List(items) => items.iter().map(Value::to_cell).collect::<Vec<_>>().join(";"),
            Value::Map(_) => "{…}".into(),
        }
    }
}

/// The tabular view of a payload, one row per sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_value(&self) -> Value {
        Value::List(
            self.rows
                .iter()
                .map(|r| Value::Map(self.columns.iter().cloned().zip(r.iter().cloned()).collect()))
                .collect(),
        )
    }
}

/// Everything a run produces. Wall time is not part of the record so that
/// identical runs give identical files.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRecord {
    pub task: Task,
    pub config_hash: String,
    pub seed: u64,
    /// The validated config, defaults filled in.
    pub config: String,
    /// `None` on success, the failure message otherwise.
    pub error: Option<String>,
    /// Task-specific summary fields.
    pub summary: Vec<(String, Value)>,
    pub table: Table,
}

impl ReportRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn status(&self) -> &'static str {
        if self.failed() {
            "failed"
        } else {
            "ok"
        }
    }

    pub fn to_value(&self) -> Value {
        let mut payload = self.summary.clone();
        payload.push(("rows".into(), self.table.to_value()));
        map([
            ("schema_version", Value::Int(SCHEMA_VERSION as i64)),
            ("library_version", env!("CARGO_PKG_VERSION").into()),
            ("task", self.task.name().into()),
            ("config_hash", self.config_hash.clone().into()),
            ("seed", Value::Int(self.seed as i64)),
            ("status", self.status().into()),
            ("error", self.error.clone().into()),
            ("columns", Value::from(self.table.columns.clone())),
            ("payload", Value::Map(payload)),
            ("config", self.config.clone().into()),
        ])
    }

    pub fn to_json(&self) -> String {
        self.to_value().to_json()
    }

    /// CSV with a leading `#` metadata line, then a header and the table rows.
    pub fn to_csv(&self) -> io::Result<String> {
        let mut head = format!(
            "# task={} schema_version={SCHEMA_VERSION} seed={} config_hash={} status={}",
            self.task.name(),
            self.seed,
            self.config_hash,
            self.status()
        );
        if let Some(e) = &self.error {
            head.push_str(" error=");
            head.push_str(&e.replace(['\n', '\r'], " "));
        }
        head.push('\n');
        let mut w = csv::Writer::from_writer(head.into_bytes());
        w.write_record(&self.table.columns)?;
        for row in &self.table.rows {
            w.write_record(row.iter().map(Value::to_cell))?;
        }
        let bytes = w.into_inner().map_err(|e| io::Error::new(io::ErrorKind::Other, e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

/// Writes `<dir>/<task>.json` and/or `<dir>/<task>.csv`; returns the paths written.
pub fn emit_report(record: &ReportRecord, dir: &Path, format: Option<Format>) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if format != Some(Format::Csv) {
        let p = dir.join(format!("{}.json", record.task.name()));
        std::fs::write(&p, record.to_json())?;
        written.push(p);
    }
    if format != Some(Format::Json) {
        let p = dir.join(format!("{}.csv", record.task.name()));
        std::fs::write(&p, record.to_csv()?)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> ReportRecord {
        let mut table = Table::new(&["k1", "k2", "cube_norm"]);
        table.push(vec![Value::Int(0), Value::Int(-1), Value::Float(0.1)]);
        table.push(vec![Value::Int(1), Value::Int(0), Value::Float(f64::INFINITY)]);
        ReportRecord {
            task: Task::ThinProfile,
            config_hash: "abc".into(),
            seed: 7,
            config: "seed = 7\n".into(),
            error: None,
            summary: vec![("levels".into(), Value::from(vec![1.0, 2.0]))],
            table,
        }
    }

    #[test]
    fn json_is_valid_and_keeps_17_digits() {
        let r = record();
        let text = r.to_json();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["schema_version"], 1);
        assert_eq!(parsed["seed"], 7);
        assert_eq!(parsed["payload"]["rows"][1]["cube_norm"], "inf");
        let x = parsed["payload"]["rows"][0]["cube_norm"].as_f64().unwrap();
        assert_eq!(x.to_bits(), 0.1f64.to_bits());
        assert!(text.contains("1.0000000000000001e-1") || text.contains("1.0000000000000000e-1"));
        let third = 1.0f64 / 3.0;
        let back: f64 = format_float(third).parse().unwrap();
        assert_eq!(back.to_bits(), third.to_bits());
    }

    #[test]
    fn csv_rows_follow_metadata_line() {
        let mut r = record();
        r.error = Some("solver died\non radius 3".into());
        let text = r.to_csv().unwrap();
        let mut lines = text.lines();
        let head = lines.next().unwrap();
        assert!(head.starts_with("# task=thin-profile") && head.contains("status=failed"));
        assert!(head.contains("solver died on radius 3"));
        assert_eq!(lines.next(), Some("k1,k2,cube_norm"));
        assert_eq!(lines.next(), Some("0,-1,1.0000000000000001e-1"));
        assert_eq!(lines.next(), Some("1,0,inf"));
    }

    #[test]
    fn format_selects_files() {
        let dir = tempfile::tempdir().unwrap();
        let r = record();
        assert_eq!(emit_report(&r, dir.path(), Some(Format::Csv)).unwrap().len(), 1);
        assert!(!dir.path().join("thin-profile.json").exists());
        assert_eq!(emit_report(&r, dir.path(), None).unwrap().len(), 2);
    }
}
