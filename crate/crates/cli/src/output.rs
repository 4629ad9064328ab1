//! Metrics, tables and the files a run leaves behind.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

/// Bumped whenever a CSV header or a summary key changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const FLASHES_HEADER: [&str; 5] = ["trajectory", "index", "t", "x", "delta_T"];
pub const DILATION_HEADER: [&str; 4] = ["eta", "mean_dt", "ci_lo", "ci_hi"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<[f64; 2]>,
    pub tolerance: String,
    /// `None` for diagnostics without a declared tolerance.
    pub pass: Option<bool>,
}

impl Metric {
    pub fn check(name: impl Into<String>, value: f64, tolerance: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            ci: None,
            tolerance: tolerance.into(),
            pass: Some(pass),
        }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            ci: None,
            tolerance: String::new(),
            pass: None,
        }
    }

    pub fn with_ci(mut self, lo: f64, hi: f64) -> Self {
        self.ci = Some([lo, hi]);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Real(x) => format!("{x:.16e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: &'static str, header: &[&'static str]) -> Self {
        Self {
            file,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.render()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Everything an experiment produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub metrics: Vec<Metric>,
    pub tables: Vec<Table>,
    pub reports: Vec<(&'static str, serde_json::Value)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.metrics.iter().all(|m| m.pass != Some(false))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timestamp {
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub code_version: &'static str,
    pub config: ExperimentConfig,
    pub passed: bool,
    pub metrics: Vec<Metric>,
    pub files: Vec<String>,
    pub error: Option<String>,
    /// The only field that changes between identical runs.
    pub timestamp: Timestamp,
}

fn write(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    f.write_all(contents).map_err(|e| CliError::io(&path, e))
}

/// Writes the tables and reports of `outcome` into `dir`; returns the names.
pub fn write_artifacts(dir: &Path, outcome: &Outcome) -> Result<Vec<String>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    for t in &outcome.tables {
        write(dir, t.file, t.to_csv().as_bytes())?;
        files.push(t.file.to_string());
    }
    for (name, value) in &outcome.reports {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        write(dir, name, text.as_bytes())?;
        files.push(name.to_string());
    }
    Ok(files)
}

pub fn write_summary(dir: &Path, summary: &RunSummary) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    write(dir, "summary.json", text.as_bytes())
}
