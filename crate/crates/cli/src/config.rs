//! Run parameters: a flat TOML file overridden by command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use regdet::numerics::Precision;
use regdet::Error;
use serde::{Deserialize, Serialize};

/// Every key is optional; each subcommand reads the ones it needs and falls
/// back to its own defaults. TOML keys are the flag names (`n-grid = "16:4096:x2"`).
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Params {
    /// Torus dimension.
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Points per axis.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Geometric grid `start:stop:xRatio` (torus sizes, cutoffs or counts).
    #[arg(long, global = true)]
    pub n_grid: Option<String>,
    /// Spectral parameter.
    #[arg(long, global = true)]
    pub z: Option<f64>,
    /// Geometric grid of z values for trace series.
    #[arg(long, global = true)]
    pub z_grid: Option<String>,
    /// Resolvent power.
    #[arg(long, global = true)]
    pub alpha: Option<u32>,
    /// Fit basis as `alpha:k` pairs, e.g. `1:1,1:0,0:1,0:0`.
    #[arg(long, global = true)]
    pub basis: Option<String>,
    /// Acceptance tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Euler–Maclaurin truncation order.
    #[arg(long = "M", global = true)]
    #[serde(rename = "M")]
    pub order: Option<u32>,
    /// Operator pattern, e.g. `1,3`.
    #[arg(long, global = true)]
    pub pattern: Option<String>,
    /// Eigenvalue-product parameterization: `by-cutoff` or `by-count`.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Single eigenvalue for the regularized-integral identity.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Registry entry for `interchange-check`.
    #[arg(long, global = true)]
    pub name: Option<String>,
    /// Run every registry entry.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub all: Option<bool>,
    /// Use the graph Laplacian instead of the combinatorial one.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub rescaled: Option<bool>,
    /// `compensated` or `double-double`.
    #[arg(long, global = true)]
    pub precision: Option<String>,
    /// Also write CSV series.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub csv: Option<bool>,
    /// Worker threads (overrides REGDET_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for report files.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        Params { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl Params {
    /// Flags in `self` win over values from `file`.
    pub fn over(self, file: Params) -> Params {
        overlay!(
            self, file, m, n, n_grid, z, z_grid, alpha, basis, tol, order, pattern, mode, lambda, name,
            all, rescaled, precision, csv, threads, out_dir
        )
    }

    pub fn load(path: &Path) -> Result<Params, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))
    }

    pub fn precision(&self) -> Result<Precision, Error> {
        match self.precision.as_deref().map(|s| s.replace('_', "-")).as_deref() {
            None | Some("compensated") => Ok(Precision::Compensated),
            Some("double-double") => Ok(Precision::DoubleDouble),
            Some(other) => Err(Error::InvalidInput(format!("unknown precision '{other}'"))),
        }
    }
}

pub fn require<T: Copy>(v: Option<T>, flag: &str) -> Result<T, Error> {
    v.ok_or_else(|| Error::InvalidInput(format!("missing --{flag}")))
}

pub fn parse_or<T: FromStr<Err = Error>>(v: &Option<String>, default: impl FnOnce() -> T) -> Result<T, Error> {
    match v {
        Some(s) => s.parse(),
        None => Ok(default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: Params = toml::from_str("m = 2\nn-grid = \"64:1024:x2\"\nM = 4\ntol = 1e-3").unwrap();
        assert_eq!(file.order, Some(4));
        let flags = Params {
            m: Some(1),
            ..Params::default()
        };
        let p = flags.over(file);
        assert_eq!(p.m, Some(1));
        assert_eq!(p.n_grid.as_deref(), Some("64:1024:x2"));
        assert_eq!(p.tol, Some(1e-3));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Params>("bogus = 1").is_err());
    }
}
