use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::failure::Failure;

pub const TOOL: &str = "sideband";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip decimal form; identical values give identical bytes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Destination of one run: `<dir>/<name>.csv` plus `<dir>/<name>.json`.
#[derive(Debug, Clone)]
pub struct Output {
    pub dir: PathBuf,
    pub name: String,
}

impl Output {
    pub fn csv_path(&self) -> PathBuf {
        self.dir.join(format!("{}.csv", self.name))
    }

    pub fn json_path(&self) -> PathBuf {
        self.dir.join(format!("{}.json", self.name))
    }

    fn ensure_dir(&self) -> Result<(), Failure> {
        fs::create_dir_all(&self.dir).map_err(|e| Failure::io(format!("{}: {e}", self.dir.display())))
    }

    pub fn write_csv(&self, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, Failure> {
        self.ensure_dir()?;
        let path = self.csv_path();
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    /// Metadata sidecar: tool, version, resolved config, seed and results.
    pub fn write_sidecar<C: Serialize>(
        &self,
        subcommand: &str,
        config: &C,
        seed: Option<u64>,
        columns: &[&str],
        results: Value,
    ) -> Result<PathBuf, Failure> {
        self.ensure_dir()?;
        let path = self.json_path();
        let doc = json!({
            "tool": TOOL,
            "version": VERSION,
            "subcommand": subcommand,
            "config": config,
            "seed": seed,
            "csv": self.csv_path().file_name().map(|n| n.to_string_lossy().into_owned()),
            "columns": columns,
            "results": results,
        });
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::io(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Reads the named numeric columns of a CSV file with a header row.
pub fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>, Failure> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let header = r.headers()?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h == *n)
                .ok_or_else(|| Failure::config(format!("{}: missing column '{n}'", path.display())))
        })
        .collect::<Result<_, _>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        for (c, &i) in idx.iter().enumerate() {
            let field = rec.get(i).unwrap_or("");
            let v: f64 = field.parse().map_err(|_| {
                Failure::config(format!(
                    "{}: row {}: column '{}' is not a number: '{field}'",
                    path.display(),
                    line + 1,
                    names[c]
                ))
            })?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}
