//! Deterministic CSV / JSON writers.
//!
//! Floats are printed with 12 significant digits so reruns produce identical
//! bytes. Field order is insertion order.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    List(Vec<Field>),
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Float(x)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::Int(x as i64)
    }
}

impl From<u64> for Field {
    fn from(x: u64) -> Self {
        Field::Int(x as i64)
    }
}

impl From<bool> for Field {
    fn from(x: bool) -> Self {
        Field::Bool(x)
    }
}

impl From<&str> for Field {
    fn from(x: &str) -> Self {
        Field::Str(x.to_string())
    }
}

impl From<String> for Field {
    fn from(x: String) -> Self {
        Field::Str(x)
    }
}

/// One output row / object.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    fields: Vec<(String, Field)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Field>) -> Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<Field>) {
        self.fields.push((key.to_string(), value.into()));
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|(k, _)| k.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("no records to emit")]
    EmptyRecords,
    #[error("CSV rows must share the header of the first row")]
    RaggedRows,
    #[error("field '{0}' is a list and cannot be written as CSV")]
    NestedCsvField(String),
    #[error("I/O error writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_field(key: &str, f: &Field) -> Result<String, EmitError> {
    Ok(match f {
        Field::Int(i) => i.to_string(),
        Field::Float(x) => format_float(*x),
        Field::Bool(b) => b.to_string(),
        Field::Str(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        Field::List(_) => return Err(EmitError::NestedCsvField(key.to_string())),
    })
}

fn json_field(out: &mut String, f: &Field) {
    match f {
        Field::Int(i) => write!(out, "{i}").unwrap(),
        Field::Float(x) if x.is_finite() => out.push_str(&format_float(*x)),
        Field::Float(_) => out.push_str("null"),
        Field::Bool(b) => write!(out, "{b}").unwrap(),
        Field::Str(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Field::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                json_field(out, item);
            }
            out.push(']');
        }
    }
}

fn json_object(out: &mut String, r: &Record, indent: &str) {
    out.push_str("{\n");
    for (i, (k, v)) in r.fields.iter().enumerate() {
        out.push_str(indent);
        out.push_str("  ");
        out.push_str(&serde_json::to_string(k).expect("key serializes"));
        out.push_str(": ");
        json_field(out, v);
        if i + 1 < r.fields.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str(indent);
    out.push('}');
}

/// Renders records; a single JSON record becomes an object, several an array.
pub fn render(records: &[Record], format: Format) -> Result<String, EmitError> {
    let first = records.first().ok_or(EmitError::EmptyRecords)?;
    let mut out = String::new();
    match format {
        Format::Csv => {
            let header: Vec<&str> = first.keys().collect();
            out.push_str(&header.join(","));
            out.push('\n');
            for r in records {
                if r.keys().ne(header.iter().copied()) {
                    return Err(EmitError::RaggedRows);
                }
                let cells = r
                    .fields
                    .iter()
                    .map(|(k, v)| csv_field(k, v))
                    .collect::<Result<Vec<_>, _>>()?;
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        Format::Json => {
            if records.len() == 1 {
                json_object(&mut out, first, "");
            } else {
                out.push_str("[\n");
                for (i, r) in records.iter().enumerate() {
                    out.push_str("  ");
                    json_object(&mut out, r, "  ");
                    if i + 1 < records.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push(']');
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn emit_results(records: &[Record], format: Format, path: &Path) -> Result<(), EmitError> {
    let text = render(records, format)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| EmitError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| EmitError::Io {
        path: path.display().to_string(),
        source,
    })
}
