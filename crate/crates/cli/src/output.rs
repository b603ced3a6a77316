use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;

/// One table cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
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

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Num(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => Value::from(*v),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

/// Row-major table with named columns.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn check_finite(&self, name: &str) -> Result<()> {
        for (r, row) in self.rows.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                if let Cell::Num(v) = cell {
                    if !v.is_finite() {
                        bail!("{name}: row {r} column {} is {v}", self.header[c]);
                    }
                }
            }
        }
        Ok(())
    }

    fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        Ok(w.into_inner()?)
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let m: Map<String, Value> =
                        self.header.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

/// Writes a file by renaming a fully written temporary file over it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Collects a command's outputs under one directory.
pub struct Output {
    dir: PathBuf,
    format: Format,
    written: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            written: Vec::new(),
        })
    }

    fn put(&mut self, file: String, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(&file), bytes)?;
        self.written.push(file);
        Ok(())
    }

    /// Writes `stem.csv` or `stem.json` depending on the chosen format.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<()> {
        table.check_finite(stem)?;
        match self.format {
            Format::Csv => self.put(format!("{stem}.csv"), &table.to_csv()?),
            Format::Json => {
                let text = serde_json::to_string_pretty(&table.to_json())? + "\n";
                self.put(format!("{stem}.json"), text.as_bytes())
            }
        }
    }

    /// Writes `name` verbatim.
    pub fn raw(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        self.put(name.to_string(), bytes)
    }

    pub fn json(&mut self, stem: &str, value: &impl Serialize) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.put(format!("{stem}.json"), text.as_bytes())
    }

    /// Writes `<command>.meta.json` listing the parameters and every output.
    pub fn finish(mut self, command: &str, seed: u64, parameters: Value) -> Result<()> {
        #[derive(Serialize)]
        struct Meta<'a> {
            tool: &'static str,
            version: &'static str,
            command: &'a str,
            seed: u64,
            parameters: Value,
            outputs: &'a [String],
        }
        let outputs = std::mem::take(&mut self.written);
        let meta = Meta {
            tool: env!("CARGO_BIN_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            parameters,
            outputs: &outputs,
        };
        let name = format!("{}.meta", command.replace(' ', "-"));
        let text = serde_json::to_string_pretty(&meta)? + "\n";
        write_atomic(&self.dir.join(format!("{name}.json")), text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_cells_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Output::new(dir.path(), Format::Csv).unwrap();
        let mut t = Table::new(["a", "b"]);
        t.push(vec![1.0.into(), "x".into()]);
        out.table("ok", &t).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("ok.csv")).unwrap(), "a,b\n1,x\n");
        t.push(vec![f64::NAN.into(), "y".into()]);
        assert!(out.table("bad", &t).is_err());
        assert!(!dir.path().join("bad.csv").exists());
    }

    #[test]
    fn json_rows_keep_column_order() {
        let mut t = Table::new(["z", "a"]);
        t.push(vec![0.5.into(), true.into()]);
        assert_eq!(t.to_json().to_string(), r#"[{"z":0.5,"a":true}]"#);
    }
}
