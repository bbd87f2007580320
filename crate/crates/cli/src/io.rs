//! File formats, number formatting, and the output envelope.
//!
//! Matrices and vectors travel as plain text: a `rows cols` header line
//! followed by row-major whitespace-separated decimals. All emitted
//! numbers go through one formatting path (17 significant digits), so the
//! CSV and JSON payloads of a command agree to the last printed digit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};

use crate::CliError;

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    parse_matrix(&text, path)
}

fn parse_matrix(text: &str, path: &Path) -> Result<DMatrix<f64>, CliError> {
    let mut tokens = text.split_whitespace();
    let rows: usize = tokens
        .next()
        .ok_or_else(|| CliError::Numeric(format!("{}: empty file", path.display())))?
        .parse()
        .map_err(|e| CliError::Numeric(format!("{}: bad row count: {e}", path.display())))?;
    let cols: usize = tokens
        .next()
        .ok_or_else(|| CliError::Numeric(format!("{}: missing column count", path.display())))?
        .parse()
        .map_err(|e| CliError::Numeric(format!("{}: bad column count: {e}", path.display())))?;
    let mut values = Vec::with_capacity(rows * cols);
    for token in tokens {
        let v: f64 = token
            .parse()
            .map_err(|e| CliError::Numeric(format!("{}: bad entry '{token}': {e}", path.display())))?;
        values.push(v);
    }
    if values.len() != rows * cols {
        return Err(CliError::Numeric(format!(
            "{}: expected {} entries ({rows} x {cols}), found {}",
            path.display(),
            rows * cols,
            values.len()
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

/// A vector file is a matrix file with one row or one column.
pub fn read_vector(path: &Path) -> Result<DVector<f64>, CliError> {
    let m = read_matrix(path)?;
    if m.ncols() == 1 {
        Ok(DVector::from_column_slice(m.column(0).as_slice()))
    } else if m.nrows() == 1 {
        Ok(DVector::from_row_slice(&m.row(0).iter().cloned().collect::<Vec<_>>()))
    } else {
        Err(CliError::Numeric(format!(
            "{}: expected a vector, found a {} x {} matrix",
            path.display(),
            m.nrows(),
            m.ncols()
        )))
    }
}

/// One cell of an output table.
#[derive(Clone, Debug)]
pub enum Value {
    Float(f64),
    Int(i64),
    Str(String),
    Bool(bool),
    /// A literal marker (e.g. "undefined"); rendered bare in CSV and as a
    /// JSON string.
    Marker(&'static str),
    /// Absent value: empty CSV field, JSON null.
    Absent,
}

impl Value {
    fn csv_field(&self) -> String {
        match self {
            Value::Float(x) => fmt_float(*x),
            Value::Int(i) => i.to_string(),
            Value::Str(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Marker(m) => (*m).to_string(),
            Value::Absent => String::new(),
        }
    }

    fn json_value(&self) -> String {
        match self {
            Value::Float(x) => fmt_float(*x),
            Value::Int(i) => i.to_string(),
            Value::Str(s) => json_string(s),
            Value::Bool(b) => b.to_string(),
            Value::Marker(m) => json_string(m),
            Value::Absent => "null".to_string(),
        }
    }
}

pub fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
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
    out
}

/// A rectangular table rendered identically (number-wise) as CSV and as a
/// JSON array of row objects.
#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.columns.len());
            let fields: Vec<String> = row.iter().map(Value::csv_field).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('{');
            for (j, (name, value)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}:{}", json_string(name), value.json_value());
            }
            out.push('}');
        }
        out.push(']');
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn sha256_hex(payload: &str) -> String {
    let digest = Sha256::digest(payload.as_bytes());
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Command metadata plus a payload; every run is reproducible from the
/// parameter echo and the checksum covers the payload bytes exactly.
pub struct Envelope {
    pub command: &'static str,
    pub params: Vec<(String, String)>,
}

impl Envelope {
    pub fn new(command: &'static str) -> Self {
        Self { command, params: Vec::new() }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    /// Render a CSV payload with the `#`-prefixed metadata header.
    pub fn render_csv(&self, payload: &str) -> String {
        let mut out = format!(
            "# command: {}\n# version: {}\n# params:",
            self.command,
            env!("CARGO_PKG_VERSION")
        );
        for (k, v) in &self.params {
            let _ = write!(out, " {k}={v}");
        }
        let _ = write!(out, "\n# checksum: sha256:{}\n", sha256_hex(payload));
        out.push_str(payload);
        out
    }

    /// Render a JSON payload (already serialized) inside the envelope
    /// object.
    pub fn render_json(&self, payload: &str) -> String {
        let mut params = String::from("{");
        for (i, (k, v)) in self.params.iter().enumerate() {
            if i > 0 {
                params.push(',');
            }
            let _ = write!(params, "{}:{}", json_string(k), json_string(v));
        }
        params.push('}');
        format!(
            "{{\"command\":{{\"name\":{},\"version\":{},\"params\":{params}}},\"checksum\":{},\"payload\":{payload}}}\n",
            json_string(self.command),
            json_string(env!("CARGO_PKG_VERSION")),
            json_string(&format!("sha256:{}", sha256_hex(payload)))
        )
    }

    pub fn render(&self, format: Format, table: &Table) -> String {
        match format {
            Format::Csv => self.render_csv(&table.to_csv()),
            Format::Json => self.render_json(&table.to_json()),
        }
    }
}

/// Send rendered output to stdout or a file.
pub fn deliver(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display()))),
    }
}
