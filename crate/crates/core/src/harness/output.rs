//! Plot-ready tables and the per-run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

/// 17 significant digits, enough to round-trip every `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Named numeric table; the first column is the abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// `{"columns": [...], "rows": [[...], ...]}`, non-finite values as `null`.
    pub fn to_json(&self) -> String {
        let cols: Vec<String> = self
            .columns
            .iter()
            .map(|c| serde_json::to_string(c).expect("string"))
            .collect();
        let mut s = format!(
            "{{\"name\":{},\"columns\":[{}],\"rows\":[",
            serde_json::to_string(&self.name).expect("string"),
            cols.join(",")
        );
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push('[');
            for (j, &v) in row.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                if v.is_finite() {
                    s.push_str(&format_float(v));
                } else {
                    s.push_str("null");
                }
            }
            s.push(']');
        }
        s.push_str("]}\n");
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Content hash in the style of `git hash-object`, over SHA-256.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize()
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Record of a run. Holds no wall-clock data, so identical configs produce
/// identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub files: Vec<FileEntry>,
    pub summary: serde_json::Value,
}

/// Writes tables into `dir` and returns their manifest entries.
pub fn write_tables(
    dir: &Path,
    tables: &[Table],
    format: OutputFormat,
) -> Result<Vec<(PathBuf, FileEntry)>> {
    fs::create_dir_all(dir)?;
    tables
        .iter()
        .map(|t| {
            let name = format!("{}.{}", t.name, format.extension());
            let body = t.render(format);
            let path = dir.join(&name);
            fs::write(&path, &body)?;
            Ok((
                path,
                FileEntry {
                    path: name,
                    sha256: content_hash(body.as_bytes()),
                    bytes: body.len(),
                },
            ))
        })
        .collect()
}
