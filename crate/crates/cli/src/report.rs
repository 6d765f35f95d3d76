//! JSON reports and CSV series.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use regdet::Error;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Params;

/// One acceptance-style comparison. `pass ⇔ |value - reference| ≤ tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Acceptance criterion this check addresses, if any.
    pub criterion: Option<u32>,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, criterion: Option<u32>, value: f64, reference: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            criterion,
            value,
            reference,
            tolerance,
            pass: (value - reference).abs() <= tolerance,
        }
    }

    /// A yes/no property, recorded as value 1 or 0 against reference 1.
    pub fn holds(name: impl Into<String>, criterion: Option<u32>, ok: bool) -> Self {
        Check::new(name, criterion, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }
}

/// What a subcommand hands back to the driver.
pub struct Outcome {
    pub summary: String,
    pub result: Value,
    pub checks: Vec<Check>,
    /// `(name, x column label, samples)` for CSV output.
    pub series: Vec<(String, String, Vec<(f64, f64)>)>,
}

impl Outcome {
    pub fn new(summary: impl Into<String>, result: impl Serialize) -> Result<Self, Error> {
        Ok(Outcome {
            summary: summary.into(),
            result: serde_json::to_value(result).map_err(|e| Error::Numerical(e.to_string()))?,
            checks: Vec::new(),
            series: Vec::new(),
        })
    }

    pub fn check(mut self, c: Check) -> Self {
        self.checks.push(c);
        self
    }

    pub fn series(mut self, name: &str, x: &str, samples: Vec<(f64, f64)>) -> Self {
        self.series.push((name.into(), x.into(), samples));
        self
    }
}

#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub command: &'a str,
    pub config: &'a Params,
    pub config_hash: &'a str,
    pub criteria: Vec<u32>,
    pub result: &'a Value,
    pub checks: &'a [Check],
    /// `None` when the command has nothing to accept or reject.
    pub pass: Option<bool>,
    pub wall_seconds: f64,
}

/// SHA-256 of the resolved parameters in their JSON form.
pub fn config_hash(p: &Params) -> String {
    let canonical = serde_json::to_string(p).expect("params serialize");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidInput(format!("cannot write {}: {e}", path.display()))
}

pub fn write_json(path: &Path, report: &Report<'_>) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| Error::Numerical(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Two-column CSV with a `# config-hash` comment line.
pub fn emit_series(dir: &Path, name: &str, x_label: &str, samples: &[(f64, f64)], hash: &str) -> Result<PathBuf, Error> {
    let path = dir.join(format!("{name}.csv"));
    let mut text = format!("# config-hash: {hash}\n{x_label},value\n");
    for (x, v) in samples {
        let _ = writeln!(text, "{x},{v:e}");
    }
    std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(path)
}
