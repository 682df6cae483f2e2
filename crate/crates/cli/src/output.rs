use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Float with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// In-memory CSV table with a fixed header and LF line endings.
#[derive(Clone, Debug)]
pub struct CsvTable {
    columns: usize,
    text: String,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            columns: header.len(),
            text,
        }
    }

    pub fn push(&mut self, row: &[String]) {
        assert_eq!(row.len(), self.columns, "row width does not match header");
        let _ = writeln!(self.text, "{}", row.join(","));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `results.csv` gets `results.csv.json` next to it.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

#[derive(Serialize)]
pub struct Metadata<'a, C: Serialize, S: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: Option<u64>,
    pub wall_time_seconds: f64,
    pub config: &'a C,
    pub notes: &'a [&'a str],
    pub summary: S,
}

pub fn write_sidecar<C: Serialize, S: Serialize>(path: &Path, meta: &Metadata<'_, C, S>) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(meta).expect("metadata serializes");
    write_file(&sidecar_path(path), &(json + "\n"))
}
