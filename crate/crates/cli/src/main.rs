//! `regdet`: command-line driver for the determinant, trace and
//! regularized-limit computations.
//!
//! Exit codes: 0 success, 1 a check failed (report still written), 2 invalid
//! input, 3 numerical failure.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use regdet::Error;

use config::Params;
use report::{config_hash, emit_series, write_json, Outcome, Report};

/// Environment variable read for the worker-thread count.
const THREADS_ENV: &str = "REGDET_THREADS";

#[derive(Debug, Parser)]
#[command(name = "regdet", version, about = "Discrete and continuum torus determinants via regularized limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat TOML file with default parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// JSON report path (default: <out-dir>/<command>.json).
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// One-dimensional spectrum of the discrete torus.
    Spectrum,
    /// log det of the combinatorial Laplacian (series with --n-grid).
    Logdet,
    /// Discrete resolvent trace.
    Trace,
    /// Spanning-tree count and the exact spectral product.
    Trees,
    /// Log-determinant through the regularized integral of the resolvent trace.
    Regint,
    /// Interchange of regularized limit and regularized integral.
    InterchangeCheck,
    /// Euler–Maclaurin pattern decomposition.
    EmCheck,
    /// Zeta-regularized determinant of the continuum torus.
    ZetaDet,
    /// Continuum resolvent trace.
    TraceContinuum,
    /// Discrete-to-continuum convergence of resolvent traces.
    Converge,
    /// Regularized limit of partial eigenvalue products.
    Eigenproduct,
    /// Regularized limit of log det Δ_n against log det_ζ Δ.
    MainTheorem,
    /// Leading n² coefficient of the two-dimensional graph-Laplacian log det.
    Cjk,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Logdet => "logdet",
            Command::Trace => "trace",
            Command::Trees => "trees",
            Command::Regint => "regint",
            Command::InterchangeCheck => "interchange-check",
            Command::EmCheck => "em-check",
            Command::ZetaDet => "zeta-det",
            Command::TraceContinuum => "trace-continuum",
            Command::Converge => "converge",
            Command::Eigenproduct => "eigenproduct",
            Command::MainTheorem => "main-theorem",
            Command::Cjk => "cjk",
        }
    }

    fn run(self, p: &Params) -> regdet::Result<Outcome> {
        match self {
            Command::Spectrum => commands::spectrum(p),
            Command::Logdet => commands::logdet(p),
            Command::Trace => commands::trace(p),
            Command::Trees => commands::trees(p),
            Command::Regint => commands::regint(p),
            Command::InterchangeCheck => commands::interchange_check(p),
            Command::EmCheck => commands::em_check(p),
            Command::ZetaDet => commands::zeta_det(p),
            Command::TraceContinuum => commands::trace_continuum(p),
            Command::Converge => commands::converge(p),
            Command::Eigenproduct => commands::eigenproduct(p),
            Command::MainTheorem => commands::main_theorem(p),
            Command::Cjk => commands::cjk(p),
        }
    }
}

fn thread_count(p: &Params) -> Result<Option<usize>, Error> {
    if let Some(t) = p.threads {
        return Ok(Some(t));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidInput(format!("{THREADS_ENV}='{v}' is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn execute(cli: Cli) -> Result<bool, Error> {
    let file = match &cli.config {
        Some(path) => Params::load(path)?,
        None => Params::default(),
    };
    let params = cli.params.over(file);
    if let Some(t) = thread_count(&params)? {
        if t == 0 {
            return Err(Error::InvalidInput("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    }
    let name = cli.command.name();
    let start = Instant::now();
    let outcome = cli.command.run(&params)?;
    let wall_seconds = start.elapsed().as_secs_f64();

    let hash = config_hash(&params);
    let dir = params.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", dir.display())))?;
    let mut criteria: Vec<u32> = outcome.checks.iter().filter_map(|c| c.criterion).collect();
    criteria.sort_unstable();
    criteria.dedup();
    let pass = (!outcome.checks.is_empty()).then(|| outcome.checks.iter().all(|c| c.pass));
    let report = Report {
        command: name,
        config: &params,
        config_hash: &hash,
        criteria,
        result: &outcome.result,
        checks: &outcome.checks,
        pass,
        wall_seconds,
    };
    let path = cli.report.clone().unwrap_or_else(|| dir.join(format!("{name}.json")));
    write_json(&path, &report)?;
    if params.csv.unwrap_or(false) {
        for (series, x, samples) in outcome.series.iter().filter(|s| !s.2.is_empty()) {
            emit_series(&dir, series, x, samples, &hash)?;
        }
    }
    let tag = match pass {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "DONE",
    };
    println!("{name}: {tag} {} (report: {})", outcome.summary, path.display());
    Ok(pass != Some(false))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
