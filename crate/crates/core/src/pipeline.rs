//! End-to-end pipelines: the regularized limit of `log det Δ_n` against the
//! zeta-determinant, and the leading coefficient of the graph-Laplacian
//! log-determinant in two dimensions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::discrete::log_det_series;
use crate::error::{Error, Result};
use crate::numerics::{GeometricGrid, Precision, Quadrature};
use crate::phg::{self, BasisSpec, FitOptions, FitReport, Samples};
use crate::smooth::log_det_zeta;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTheoremReport {
    pub m: u32,
    pub rescaled: bool,
    pub ns: Vec<u32>,
    pub constant: f64,
    pub uncertainty: f64,
    /// `log det_ζ Δ`, shifted by `2ζ(0) log 2π = -2 log 2π` when rescaled.
    pub reference: f64,
    pub difference: f64,
    /// `(n, log det)` as fitted.
    pub samples: Vec<(f64, f64)>,
    pub fit: FitReport,
}

pub fn default_basis(m: u32) -> BasisSpec {
    let pairs = match m {
        1 => vec![(1.0, 1), (1.0, 0), (0.0, 1), (0.0, 0)],
        _ => vec![
            (2.0, 1),
            (2.0, 0),
            (1.0, 1),
            (1.0, 0),
            (0.0, 1),
            (0.0, 0),
            (-1.0, 0),
            (-2.0, 0),
        ],
    };
    BasisSpec::for_reglimit(pairs).expect("valid default basis")
}

pub fn default_grid(m: u32) -> GeometricGrid {
    match m {
        1 => GeometricGrid::new(16.0, 4096.0, 2.0),
        _ => GeometricGrid::new(64.0, 1024.0, 2f64.powf(1.0 / 3.0)),
    }
    .expect("valid default grid")
}

fn sizes(grid: &GeometricGrid) -> Result<Vec<u32>> {
    grid.integer_points()
        .into_iter()
        .map(|n| u32::try_from(n).map_err(|_| Error::invalid(format!("torus size {n} too large"))))
        .filter(|n| !matches!(n, Ok(0) | Ok(1)))
        .collect()
}

/// `LIM_{n→∞} log det Δ_n` fitted along `grid`, alongside `log det_ζ Δ`.
///
/// With `rescaled` the graph Laplacian is used instead, and the reference is
/// shifted by `2ζ(0,Δ) log 2π`.
pub fn main_theorem_pipeline(
    m: u32,
    grid: &GeometricGrid,
    basis: &BasisSpec,
    rescaled: bool,
    precision: Precision,
) -> Result<MainTheoremReport> {
    if !basis.contains(0.0, 0) {
        return Err(Error::invalid("basis must contain the constant term (0, 0)"));
    }
    let ns = sizes(grid)?;
    let samples = log_det_series(m, &ns, rescaled, precision)?;
    let s = Samples::new(samples.clone())?;
    let (constant, uncertainty, fit) = phg::extract_reglimit_with(&s, basis, &FitOptions::default())?;
    let mut reference = log_det_zeta(m)?;
    if rescaled {
        reference -= 2.0 * (2.0 * PI).ln();
    }
    Ok(MainTheoremReport {
        m,
        rescaled,
        ns,
        constant,
        uncertainty,
        reference,
        difference: constant - reference,
        samples,
        fit,
    })
}

/// `(1/4π²) ∫∫_{[0,2π]²} log(4 - 2cos u - 2cos v) du dv`, by nested
/// quadrature over a quarter of the square.
pub fn cjk_reference() -> Result<f64> {
    let inner_q = Quadrature::new(1e-15, 1e-14).with_max_intervals(4000);
    let outer_q = Quadrature::new(1e-13, 1e-12).with_max_intervals(4000);
    let failed = std::cell::Cell::new(false);
    let inner = |u: f64| {
        // 4 - 2cos u - 2cos v = 4sin²(u/2) + 4sin²(v/2), free of
        // cancellation near the logarithmic corner
        let c = 4.0 * (u / 2.0).sin().powi(2);
        match inner_q.integrate(|v| (c + 4.0 * (v / 2.0).sin().powi(2)).ln(), 0.0, PI) {
            Ok(r) => r.value,
            Err(_) => {
                failed.set(true);
                f64::NAN
            }
        }
    };
    let r = outer_q.integrate_with_breaks(inner, &[0.0, 1e-3, 0.1, PI])?;
    if failed.get() {
        return Err(Error::Numerical("inner quadrature of the CJK integral did not converge".into()));
    }
    Ok(r.value / (PI * PI))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CjkReport {
    pub ns: Vec<u32>,
    /// Fitted coefficient of `n²` in the graph-Laplacian `log det`.
    pub leading: f64,
    pub reference: f64,
    pub difference: f64,
    pub fit: FitReport,
}

pub fn cjk_basis() -> BasisSpec {
    BasisSpec::new(vec![(2.0, 0), (0.0, 1), (0.0, 0), (-2.0, 0), (-4.0, 0)]).expect("valid basis")
}

pub fn cjk_default_grid() -> GeometricGrid {
    GeometricGrid::new(32.0, 512.0, std::f64::consts::SQRT_2).expect("valid default grid")
}

/// Leading `n²` coefficient of the rescaled `m = 2` log-determinant.
pub fn cjk_leading_coefficient(grid: &GeometricGrid, basis: &BasisSpec) -> Result<CjkReport> {
    if !basis.contains(2.0, 0) {
        return Err(Error::invalid("basis must contain the n² term (2, 0)"));
    }
    let ns = sizes(grid)?;
    let samples = log_det_series(2, &ns, true, Precision::Compensated)?;
    let (_, fit) = phg::fit_expansion(&Samples::new(samples)?, basis)?;
    let leading = fit.coefficient(2.0, 0).expect("basis contains (2, 0)");
    let reference = cjk_reference()?;
    Ok(CjkReport {
        ns,
        leading,
        reference,
        difference: leading - reference,
        fit,
    })
}
