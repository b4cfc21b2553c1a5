//! Tables written as CSV or JSON lines with fixed formatting.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "jsonl",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// 17 significant digits; −0 is written as 0.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0.0000000000000000e0".into()
    } else if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => Number::from_f64(if *x == 0.0 { 0.0 } else { *x }).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(Vec::new());
                w.write_record(&self.columns).map_err(io_csv)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(io_csv)?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.to_string()))
            }
            Format::Json => {
                let mut out = Vec::new();
                for row in &self.rows {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(k, v)| (k.to_string(), v.json()))
                        .collect();
                    serde_json::to_writer(&mut out, &Value::Object(obj))
                        .map_err(|e| CliError::Io(e.to_string()))?;
                    out.push(b'\n');
                }
                Ok(out)
            }
        }
    }

    /// Writes `<dir>/<stem>.<ext>` and returns the path.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        let bytes = self.render(format)?;
        write_file(&path, &bytes)?;
        Ok(path)
    }
}

fn io_csv(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_formatting() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![Cell::Num(-0.0), Cell::Num(0.1), "x".into()]);
        t.push(vec![Cell::Num(-1.25), Cell::Empty, Cell::Bool(true)]);
        let s = String::from_utf8(t.render(Format::Csv).unwrap()).unwrap();
        assert_eq!(
            s,
            "a,b,c\n0.0000000000000000e0,1.0000000000000001e-1,x\n-1.2500000000000000e0,,true\n"
        );
        let j = String::from_utf8(t.render(Format::Json).unwrap()).unwrap();
        assert_eq!(j.lines().next().unwrap(), r#"{"a":0.0,"b":0.1,"c":"x"}"#);
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["x", "y"]);
        assert_eq!(t.render(Format::Csv).unwrap(), b"x,y\n");
        assert!(t.render(Format::Json).unwrap().is_empty());
    }
}
