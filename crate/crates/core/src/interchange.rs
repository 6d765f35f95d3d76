//! Interchanging regularized limits and regularized integrals for jointly
//! homogeneous functions `f(tz, tn) = t^d f(z, n)`:
//!
//! `LIM_n ⨍_1^∞ f(z,n) dz = ⨍_1^∞ LIM_n f(z,n) dz + Corr`,
//!
//! with `Corr = ⨍_0^∞ f(z,1) dz` when `d = -1` and zero otherwise.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{GeometricGrid, Quadrature};
use crate::phg::{self, BasisSpec, Direction, ExpTerm, Expansion, Samples};
use crate::regint::{finite_part_tail_inf, reg_integral, IntegrandHandle, RegIntOptions, Side, TailModel};

/// `|d + 1|` below which the degree counts as `-1`.
pub const DEGREE_TOL: f64 = 1e-12;

/// Relative tolerance of the sampled homogeneity check.
pub const HOMOGENEITY_TOL: f64 = 1e-12;

type Evaluator = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A jointly homogeneous function with its declared expansions.
#[derive(Clone)]
pub struct HomogeneousFn {
    pub name: String,
    evaluator: Evaluator,
    pub degree: f64,
    /// Expansion of `f(·, 1)` at infinity.
    pub expansion_z: Expansion,
    /// Expansion of `f(1, ·)` at infinity.
    pub expansion_n: Expansion,
    /// Fit basis in `n` for `⨍_1^∞ f(z, n) dz`.
    pub basis_n: BasisSpec,
}

impl fmt::Debug for HomogeneousFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogeneousFn")
            .field("name", &self.name)
            .field("degree", &self.degree)
            .field("expansion_z", &self.expansion_z)
            .field("expansion_n", &self.expansion_n)
            .finish_non_exhaustive()
    }
}

impl HomogeneousFn {
    /// Validates the expansion hypotheses and re-verifies homogeneity.
    pub fn new(
        name: impl Into<String>,
        evaluator: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        degree: f64,
        expansion_z: Expansion,
        expansion_n: Expansion,
        basis_n: BasisSpec,
    ) -> Result<Self> {
        let f = HomogeneousFn {
            name: name.into(),
            evaluator: Arc::new(evaluator),
            degree,
            expansion_z,
            expansion_n,
            basis_n,
        };
        if f.expansion_z.direction() != Direction::ToInfinity
            || f.expansion_n.direction() != Direction::ToInfinity
        {
            return Err(Error::invalid("both expansions must be at infinity"));
        }
        if !(f.expansion_z.remainder().0 < -1.0) {
            return Err(Error::invalid("z-expansion remainder exponent must be below -1"));
        }
        if !(f.expansion_n.remainder().0 < 0f64.min(degree + 1.0)) {
            return Err(Error::invalid("n-expansion remainder exponent must be below min(0, d+1)"));
        }
        f.basis_n.validate()?;
        let residual = f.homogeneity_residual();
        if !(residual <= HOMOGENEITY_TOL) {
            return Err(Error::invalid(format!(
                "{}: homogeneity of degree {degree} violated (relative residual {residual:e})",
                f.name
            )));
        }
        Ok(f)
    }

    #[inline]
    pub fn eval(&self, z: f64, n: f64) -> f64 {
        (self.evaluator)(z, n)
    }

    pub fn is_degree_minus_one(&self) -> bool {
        (self.degree + 1.0).abs() <= DEGREE_TOL
    }

    /// Largest `|f(tz,tn) - t^d f(z,n)| / |t^d f(z,n)|` over a fixed
    /// low-discrepancy sample of `(z, n, t)`.
    pub fn homogeneity_residual(&self) -> f64 {
        let golden = 0.618_033_988_749_895;
        let mut worst: f64 = 0.0;
        for i in 1..=64 {
            let fi = f64::from(i);
            let u = |c: f64| (fi * golden * c).fract();
            let z = 10f64.powf(4.0 * u(1.0) - 2.0);
            let n = 10f64.powf(4.0 * u(2.0) - 2.0);
            let t = 10f64.powf(4.0 * u(3.0) - 2.0);
            let base = t.powf(self.degree) * self.eval(z, n);
            let scaled = self.eval(t * z, t * n);
            if base != 0.0 {
                worst = worst.max(((scaled - base) / base).abs());
            } else {
                worst = worst.max(scaled.abs());
            }
        }
        worst
    }

    /// Expansion of `f(z, 1)` as `z → 0`, read off from the `n` expansion via
    /// `f(z, 1) = z^d f(1, 1/z)`.
    pub fn expansion_zero(&self) -> Result<Expansion> {
        let d = self.degree;
        let terms = self
            .expansion_n
            .terms()
            .iter()
            .map(|t| {
                let sign = if t.k % 2 == 0 { 1.0 } else { -1.0 };
                ExpTerm::new(d - t.alpha, t.k, sign * t.coeff)
            })
            .collect();
        let (ra, rk) = self.expansion_n.remainder();
        Expansion::new(Direction::ToZero, terms, (d - ra, rk))
    }

    /// Expansion of `z ↦ f(z, n)` at infinity:
    /// `n^d Σ a_{jk} (z/n)^{α_j} log^k(z/n)`, re-expanded in powers of `log z`.
    pub fn expansion_z_at(&self, n: f64) -> Result<Expansion> {
        let d = self.degree;
        let ln_n = n.ln();
        let mut acc: BTreeMap<(u64, u32), (f64, f64)> = BTreeMap::new();
        for t in self.expansion_z.terms() {
            let scale = n.powf(d - t.alpha) * t.coeff;
            let mut binom = 1.0;
            for kp in 0..=t.k {
                if kp > 0 {
                    binom *= f64::from(t.k - kp + 1) / f64::from(kp);
                }
                // C(k, k') (-log n)^{k-k'}, with C(k, k') = C(k, k - k')
                let c = scale * binom * (-ln_n).powi((t.k - kp) as i32);
                let key = ((-t.alpha).to_bits(), t.k - kp);
                let e = acc.entry(key).or_insert((t.alpha, 0.0));
                e.1 += c;
            }
        }
        let terms = acc
            .into_iter()
            .map(|((_, k), (alpha, c))| ExpTerm::new(alpha, k, c))
            .collect();
        Expansion::new(Direction::ToInfinity, terms, self.expansion_z.remainder())
    }
}

/// Outcome of one interchange check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterchangeReport {
    pub name: String,
    pub lhs: f64,
    pub lhs_uncertainty: f64,
    pub rhs: f64,
    pub corr: f64,
    pub degree: f64,
    pub abs_diff: f64,
    pub tol: f64,
    pub pass: bool,
}

/// `⨍_0^∞ f(z, 1) dz` when `d = -1`, else zero.
pub fn correction_term(f: &HomogeneousFn) -> Result<f64> {
    if !f.is_degree_minus_one() {
        return Ok(0.0);
    }
    let g = |z: f64| f.eval(z, 1.0);
    let handle = IntegrandHandle::new(&g)
        .with_zero(f.expansion_zero()?)
        .with_inf(f.expansion_z.clone());
    let opts = RegIntOptions {
        quad_tol: 1e-13,
        ..RegIntOptions::default()
    };
    // declared expansions only: the bases are unused
    let unused = BasisSpec::new(vec![(0.0, 0)])?;
    Ok(reg_integral(&handle, (1e-3, 64.0), &unused, &unused, &opts)?.value)
}

/// `⨍_1^∞ f(z, n) dz` for one `n`, with the tail from the rescaled expansion.
pub fn tail_integral_at(f: &HomogeneousFn, n: f64) -> Result<f64> {
    let upper = 64.0 * n.max(1.0);
    let q = Quadrature::new(1e-14, 1e-13).with_max_intervals(20_000);
    let mut breaks = vec![1.0];
    if n > 1.0 {
        breaks.push(n);
    }
    breaks.push(upper);
    let core = q.integrate_with_breaks(|z| f.eval(z, n), &breaks)?;
    let tail = TailModel::new(Side::Infinity, f.expansion_z_at(n)?, upper)?;
    Ok(core.value + tail.finite_part())
}

/// `LIM_n ⨍_1^∞ f(z, n) dz` fitted over `n_grid` against `basis_n`; returns
/// the constant and its uncertainty.
pub fn lhs_interchange(f: &HomogeneousFn, n_grid: &GeometricGrid, basis_n: &BasisSpec) -> Result<(f64, f64)> {
    let ns = n_grid.points();
    if ns.len() < basis_n.len() + 2 {
        return Err(Error::invalid(format!(
            "n grid has {} points; the basis needs at least {}",
            ns.len(),
            basis_n.len() + 2
        )));
    }
    let points = ns
        .iter()
        .map(|&n| Ok((n, tail_integral_at(f, n)?)))
        .collect::<Result<Vec<_>>>()?;
    phg::extract_reglimit(&Samples::new(points)?, basis_n)
}

/// `⨍_1^∞ LIM_n f(z, n) dz + Corr`, where `LIM_n f(z, n) = Σ_k (-1)^k b_{0k}
/// z^d log^k z` comes from the `β = 0` coefficients of the `n` expansion.
pub fn rhs_interchange(f: &HomogeneousFn) -> Result<f64> {
    let d = f.degree;
    let pointwise: f64 = f
        .expansion_n
        .terms()
        .iter()
        .filter(|t| t.alpha == 0.0)
        .map(|t| {
            let sign = if t.k % 2 == 0 { 1.0 } else { -1.0 };
            sign * t.coeff * finite_part_tail_inf(d, t.k, 1.0)
        })
        .sum();
    Ok(pointwise + correction_term(f)?)
}

/// Default `n` grid for [`check_interchange`].
pub fn default_n_grid() -> GeometricGrid {
    GeometricGrid::new(16.0, 4096.0, 2.0).expect("valid grid")
}

pub fn check_interchange(f: &HomogeneousFn, tol: f64) -> Result<InterchangeReport> {
    check_interchange_on(f, &default_n_grid(), tol)
}

pub fn check_interchange_on(f: &HomogeneousFn, n_grid: &GeometricGrid, tol: f64) -> Result<InterchangeReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let (lhs, lhs_uncertainty) = lhs_interchange(f, n_grid, &f.basis_n)?;
    let corr = correction_term(f)?;
    let rhs = rhs_interchange(f)?;
    let abs_diff = (lhs - rhs).abs();
    Ok(InterchangeReport {
        name: f.name.clone(),
        lhs,
        lhs_uncertainty,
        rhs,
        corr,
        degree: f.degree,
        abs_diff,
        tol,
        pass: abs_diff <= tol,
    })
}

fn series(direction: Direction, terms: &[(f64, u32, f64)], remainder: f64) -> Expansion {
    let terms = terms.iter().map(|&(a, k, c)| ExpTerm::new(a, k, c)).collect();
    Expansion::new(direction, terms, (remainder, 0)).expect("valid registry expansion")
}

fn powers(pairs: &[f64]) -> BasisSpec {
    BasisSpec::for_reglimit(pairs.iter().map(|&a| (a, 0)).collect()).expect("valid registry basis")
}

/// `(1 + x²)^{-1}` and `(1 + x²)^{-2}` at infinity, as `x^{-2j}` series.
fn inverse_square_series(power: u32, leading: f64, terms: usize) -> Vec<(f64, u32, f64)> {
    (0..terms)
        .map(|j| {
            let jf = j as f64;
            // binomial series of (1 + y)^{-p} with y = x^{-2}
            let c = if power == 1 { 1.0 } else { jf + 1.0 };
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            (leading - 2.0 * jf, 0, sign * c)
        })
        .collect()
}

/// The built-in test functions, covering both branches `d = -1` and `d ≠ -1`.
pub fn registry() -> Vec<HomogeneousFn> {
    let inf = Direction::ToInfinity;
    let mut out = Vec::new();
    out.push(
        HomogeneousFn::new(
            "n/(z^2+n^2)",
            |z, n| n / (z * z + n * n),
            -1.0,
            series(inf, &inverse_square_series(1, -2.0, 5), -12.0),
            series(inf, &inverse_square_series(1, -1.0, 5), -11.0),
            powers(&[0.0, -1.0, -3.0, -5.0, -7.0]),
        )
        .expect("registry entry"),
    );
    out.push(
        HomogeneousFn::new(
            "n^2/(z^2+n^2)",
            |z, n| n * n / (z * z + n * n),
            0.0,
            series(inf, &inverse_square_series(1, -2.0, 5), -12.0),
            series(inf, &inverse_square_series(1, 0.0, 5), -10.0),
            powers(&[1.0, 0.0, -2.0, -4.0, -6.0]),
        )
        .expect("registry entry"),
    );
    out.push(
        HomogeneousFn::new(
            "z^-2",
            |z, _n| 1.0 / (z * z),
            -2.0,
            series(inf, &[(-2.0, 0, 1.0)], -4.0),
            series(inf, &[(0.0, 0, 1.0)], -3.0),
            powers(&[0.0, -1.0]),
        )
        .expect("registry entry"),
    );
    out.push(
        HomogeneousFn::new(
            "n^3/(z^2+n^2)^2",
            |z, n| {
                let s = z * z + n * n;
                n * n * n / (s * s)
            },
            -1.0,
            series(inf, &inverse_square_series(2, -4.0, 5), -14.0),
            series(inf, &inverse_square_series(2, -1.0, 5), -11.0),
            powers(&[0.0, -1.0, -3.0, -5.0, -7.0]),
        )
        .expect("registry entry"),
    );
    let alternating = |leading: f64, terms: usize| -> Vec<(f64, u32, f64)> {
        (0..terms)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                (leading - j as f64, 0, sign)
            })
            .collect()
    };
    out.push(
        HomogeneousFn::new(
            "n/(z(z+n))",
            |z, n| n / (z * (z + n)),
            -1.0,
            series(inf, &alternating(-2.0, 9), -11.0),
            series(inf, &alternating(0.0, 9), -9.0),
            BasisSpec::for_reglimit(vec![
                (0.0, 1),
                (0.0, 0),
                (-1.0, 0),
                (-2.0, 0),
                (-3.0, 0),
                (-4.0, 0),
                (-5.0, 0),
            ])
            .expect("valid registry basis"),
        )
        .expect("registry entry"),
    );
    out
}

/// Looks up a registry function by name.
pub fn registry_entry(name: &str) -> Option<HomogeneousFn> {
    registry().into_iter().find(|f| f.name == name)
}
