//! Column tables written as CSV with a JSON metadata line, or as JSON.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::Format;
use crate::CliError;

pub struct Table {
    pub meta: Value,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl Table {
    pub fn new(meta: Value) -> Self {
        Table {
            meta,
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) {
        if let Some((_, first)) = self.columns.first() {
            assert_eq!(first.len(), values.len(), "column length mismatch");
        }
        self.columns.push((name.into(), values));
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# {}", self.meta)?;
        let names: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        writeln!(w, "{}", names.join(","))?;
        let rows = self.columns.first().map_or(0, |(_, c)| c.len());
        for r in 0..rows {
            let line: Vec<String> = self
                .columns
                .iter()
                .map(|(_, c)| format!("{:e}", c[r]))
                .collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let cols: serde_json::Map<String, Value> = self
            .columns
            .iter()
            .map(|(n, c)| (n.clone(), json!(c)))
            .collect();
        json!({ "meta": self.meta, "columns": cols })
    }

    /// Writes `<stem>.csv` and/or `<stem>.json` into `dir`; returns the paths.
    pub fn save(
        &self,
        dir: &Path,
        stem: &str,
        formats: &[Format],
    ) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for f in formats {
            let path = match f {
                Format::Csv => dir.join(format!("{stem}.csv")),
                Format::Json => dir.join(format!("{stem}.json")),
            };
            let mut w = BufWriter::new(File::create(&path)?);
            match f {
                Format::Csv => self.write_csv(&mut w)?,
                Format::Json => {
                    serde_json::to_writer_pretty(&mut w, &self.to_json())
                        .map_err(|e| CliError::Runtime(e.to_string()))?;
                    w.write_all(b"\n")?;
                }
            }
            w.flush()?;
            written.push(path);
        }
        Ok(written)
    }
}
