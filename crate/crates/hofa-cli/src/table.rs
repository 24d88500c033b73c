//! Tabular output as CSV or JSON with a fixed column order.

use std::io::Write;
use std::path::Path;

use hofa_core::ratmod::{format_rational, ExactRational};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("row has {got} cells, expected {expected}")]
    Width { expected: usize, got: usize },
    #[error("malformed table file: {0}")]
    Malformed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Frac(ExactRational),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<ExactRational> for Cell {
    fn from(x: ExactRational) -> Self {
        Cell::Frac(x)
    }
}

impl From<&ExactRational> for Cell {
    fn from(x: &ExactRational) -> Self {
        Cell::Frac(x.clone())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_owned())
    }
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// 12 significant digits, shortest form, always with a decimal point or exponent.
pub fn fmt_float(x: f64) -> String {
    format!("{:?}", round12(x))
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(x) => x.to_string(),
            Cell::Frac(q) => format_rational(q),
            Cell::Float(x) => fmt_float(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(x) => Value::from(*x),
            Cell::Frac(q) => Value::from(format_rational(q)),
            Cell::Float(x) => serde_json::Number::from_f64(round12(*x)).map_or(Value::Null, Value::Number),
            Cell::Bool(b) => Value::from(*b),
            Cell::Text(s) => Value::from(s.clone()),
        }
    }

    fn from_json(v: &Value) -> Result<Cell, TableError> {
        Ok(match v {
            Value::Bool(b) => Cell::Bool(*b),
            Value::Number(n) if n.is_i64() => Cell::Int(n.as_i64().expect("i64")),
            Value::Number(n) => Cell::Float(n.as_f64().ok_or_else(|| TableError::Malformed(n.to_string()))?),
            Value::String(s) => Cell::Text(s.clone()),
            Value::Null => Cell::Float(f64::NAN),
            other => return Err(TableError::Malformed(other.to_string())),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> Result<String, TableError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            if row.len() != self.columns.len() {
                return Err(TableError::Width { expected: self.columns.len(), got: row.len() });
            }
            w.write_record(row.iter().map(Cell::text))?;
        }
        let bytes = w.into_inner().map_err(|e| TableError::Malformed(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("utf8"))
    }

    pub fn to_json(&self) -> Result<String, TableError> {
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        let v = serde_json::json!({ "columns": self.columns, "rows": rows });
        let mut s = serde_json::to_string_pretty(&v)?;
        s.push('\n');
        Ok(s)
    }

    /// Reads back the output of [`Table::to_json`]; fractions come back as text.
    pub fn from_json(s: &str) -> Result<Table, TableError> {
        let v: Value = serde_json::from_str(s)?;
        let columns = v["columns"]
            .as_array()
            .ok_or_else(|| TableError::Malformed("columns".into()))?
            .iter()
            .map(|c| c.as_str().map(str::to_owned).ok_or_else(|| TableError::Malformed("column name".into())))
            .collect::<Result<Vec<_>, _>>()?;
        let rows = v["rows"]
            .as_array()
            .ok_or_else(|| TableError::Malformed("rows".into()))?
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| TableError::Malformed("row".into()))?
                    .iter()
                    .map(Cell::from_json)
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Table { columns, rows })
    }

    pub fn render(&self, format: Format) -> Result<String, TableError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Writes `table` to `path`, or to stdout when `path` is `None`.
pub fn emit_table(table: &Table, format: Format, path: Option<&Path>) -> Result<(), TableError> {
    let text = table.render(format)?;
    write_text(&text, path)
}

pub fn write_text(text: &str, path: Option<&Path>) -> Result<(), TableError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .map_err(|source| TableError::Io { path: dir.display().to_string(), source })?;
            }
            std::fs::write(p, text).map_err(|source| TableError::Io { path: p.display().to_string(), source })
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|source| TableError::Io { path: "<stdout>".into(), source })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hofa_core::ratmod::rat;

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(1.0), "1.0");
        assert_eq!(fmt_float(0.1 + 0.2), "0.3");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(-2.5e-20), "-2.5e-20");
    }

    #[test]
    fn empty_rows_give_header_only() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n");
    }

    #[test]
    fn fractions_print_as_p_over_q() {
        let mut t = Table::new(&["x"]);
        t.push(vec![rat(-6, 4).into()]);
        t.push(vec![rat(3, 1).into()]);
        assert_eq!(t.to_csv().unwrap(), "x\n-3/2\n3\n");
    }
}
