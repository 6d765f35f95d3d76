//! Polyhomogeneous expansions `Σ a_{jk} x^{α_j} log^k x`, their evaluation,
//! least-squares fitting, and extraction of the regularized limit (the
//! coefficient of `x^0 log^0 x`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::lstsq;

/// Limit direction an expansion describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    ToInfinity,
    ToZero,
}

/// One term `coeff · x^alpha · log^k x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub alpha: f64,
    pub k: u32,
    pub coeff: f64,
}

impl ExpTerm {
    pub fn new(alpha: f64, k: u32, coeff: f64) -> Self {
        ExpTerm { alpha, k, coeff }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeff * basis_fn(self.alpha, self.k, x)
    }
}

/// `x^alpha · log^k x`.
#[inline]
pub fn basis_fn(alpha: f64, k: u32, x: f64) -> f64 {
    let p = if alpha == 0.0 { 1.0 } else { x.powf(alpha) };
    if k == 0 {
        p
    } else {
        p * x.ln().powi(k as i32)
    }
}

/// Finite polyhomogeneous expansion with a remainder order
/// `o(x^{alpha_N} log^{M_N} x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    direction: Direction,
    terms: Vec<ExpTerm>,
    remainder: (f64, u32),
}

impl Expansion {
    /// Builds an expansion, ordering terms from dominant to subdominant.
    ///
    /// Terms sharing `(alpha, k)` are rejected, as is a remainder order that
    /// does not lie beyond every term exponent.
    pub fn new(direction: Direction, mut terms: Vec<ExpTerm>, remainder: (f64, u32)) -> Result<Self> {
        if terms.iter().any(|t| !t.alpha.is_finite() || !t.coeff.is_finite()) {
            return Err(Error::invalid("expansion terms must be finite"));
        }
        match direction {
            Direction::ToInfinity => terms.sort_by(|a, b| {
                b.alpha.total_cmp(&a.alpha).then(b.k.cmp(&a.k))
            }),
            Direction::ToZero => terms.sort_by(|a, b| {
                a.alpha.total_cmp(&b.alpha).then(b.k.cmp(&a.k))
            }),
        }
        if terms
            .windows(2)
            .any(|w| w[0].alpha == w[1].alpha && w[0].k == w[1].k)
        {
            return Err(Error::invalid("duplicate (alpha, k) pair in expansion"));
        }
        let beyond = terms.iter().all(|t| match direction {
            Direction::ToInfinity => remainder.0 < t.alpha,
            Direction::ToZero => remainder.0 > t.alpha,
        });
        if !beyond {
            return Err(Error::invalid(format!(
                "remainder order {} does not lie beyond all term exponents",
                remainder.0
            )));
        }
        Ok(Expansion {
            direction,
            terms,
            remainder,
        })
    }

    /// Expansion with a remainder one unit past the last term.
    pub fn with_terms(direction: Direction, terms: Vec<ExpTerm>) -> Result<Self> {
        let rem = match direction {
            Direction::ToInfinity => terms.iter().map(|t| t.alpha).fold(0.0, f64::min) - 1.0,
            Direction::ToZero => terms.iter().map(|t| t.alpha).fold(0.0, f64::max) + 1.0,
        };
        Expansion::new(direction, terms, (rem, 0))
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn remainder(&self) -> (f64, u32) {
        self.remainder
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_expansion(self, x)
    }

    pub fn coefficient(&self, alpha: f64, k: u32) -> f64 {
        self.terms
            .iter()
            .find(|t| t.alpha == alpha && t.k == k)
            .map_or(0.0, |t| t.coeff)
    }

    /// `c · self`.
    pub fn scaled(&self, c: f64) -> Expansion {
        let terms = self
            .terms
            .iter()
            .map(|t| ExpTerm::new(t.alpha, t.k, c * t.coeff))
            .collect();
        Expansion {
            direction: self.direction,
            terms,
            remainder: self.remainder,
        }
    }

    /// Termwise sum of two expansions with the same direction; the remainder
    /// is the weaker of the two.
    pub fn sum(&self, other: &Expansion) -> Result<Expansion> {
        if self.direction != other.direction {
            return Err(Error::invalid("cannot add expansions with different directions"));
        }
        let mut acc: BTreeMap<(OrdF64, u32), f64> = BTreeMap::new();
        for t in self.terms.iter().chain(&other.terms) {
            *acc.entry((OrdF64(t.alpha), t.k)).or_insert(0.0) += t.coeff;
        }
        let terms = acc
            .into_iter()
            .map(|((a, k), c)| ExpTerm::new(a.0, k, c))
            .collect();
        let rem = match self.direction {
            Direction::ToInfinity => {
                if self.remainder.0 >= other.remainder.0 {
                    self.remainder
                } else {
                    other.remainder
                }
            }
            Direction::ToZero => {
                if self.remainder.0 <= other.remainder.0 {
                    self.remainder
                } else {
                    other.remainder
                }
            }
        };
        Expansion::new(self.direction, terms, rem)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Serialize, Deserialize)]
struct ExpansionRepr {
    direction: Direction,
    terms: Vec<(f64, u32, f64)>,
    remainder: (f64, u32),
}

impl Serialize for Expansion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExpansionRepr {
            direction: self.direction,
            terms: self.terms.iter().map(|t| (t.alpha, t.k, t.coeff)).collect(),
            remainder: self.remainder,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Expansion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ExpansionRepr::deserialize(d)?;
        let terms = r
            .terms
            .into_iter()
            .map(|(a, k, c)| ExpTerm::new(a, k, c))
            .collect();
        Expansion::new(r.direction, terms, r.remainder).map_err(serde::de::Error::custom)
    }
}

/// `Σ coeff · x^alpha · log^k x`.
pub fn eval_expansion(e: &Expansion, x: f64) -> f64 {
    e.terms.iter().map(|t| t.eval(x)).sum()
}

/// The regularized limit: the coefficient of the `(0, 0)` term, zero when absent.
pub fn regularized_limit(e: &Expansion) -> f64 {
    e.coefficient(0.0, 0)
}

/// Declared set of `(alpha, k)` basis functions for a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub pairs: Vec<(f64, u32)>,
    #[serde(default)]
    pub must_contain_constant: bool,
}

impl BasisSpec {
    pub fn new(pairs: Vec<(f64, u32)>) -> Result<Self> {
        let b = BasisSpec {
            pairs,
            must_contain_constant: false,
        };
        b.validate()?;
        Ok(b)
    }

    /// A basis to be used for regularized-limit extraction; requires `(0, 0)`.
    pub fn for_reglimit(pairs: Vec<(f64, u32)>) -> Result<Self> {
        let b = BasisSpec {
            pairs,
            must_contain_constant: true,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, alpha: f64, k: u32) -> bool {
        self.pairs.iter().any(|&(a, kk)| a == alpha && kk == k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::invalid("basis is empty"));
        }
        for (i, &(a, k)) in self.pairs.iter().enumerate() {
            if !a.is_finite() {
                return Err(Error::invalid("basis exponent must be finite"));
            }
            if self.pairs[..i].iter().any(|&(b, kk)| b == a && kk == k) {
                return Err(Error::invalid(format!("basis pair ({a}, {k}) repeated")));
            }
        }
        if self.must_contain_constant && !self.contains(0.0, 0) {
            return Err(Error::invalid("basis must contain the constant pair (0, 0)"));
        }
        Ok(())
    }
}

impl std::str::FromStr for BasisSpec {
    type Err = Error;

    /// Parses `"2:1,2:0,0:0"` (alpha:k pairs separated by commas).
    fn from_str(s: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (a, k) = item
                .split_once(':')
                .ok_or_else(|| Error::invalid(format!("basis item '{item}' is not alpha:k")))?;
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad exponent in '{item}'")))?;
            let k: u32 = k
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad log power in '{item}'")))?;
            pairs.push((a, k));
        }
        BasisSpec::new(pairs)
    }
}

/// Sample points `(x_i, y_i)` with strictly increasing positive `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    points: Vec<(f64, f64)>,
}

impl Samples {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|&(x, y)| !(x > 0.0) || !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid("sample abscissae must be positive and values finite"));
        }
        if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::invalid("sample abscissae must be strictly increasing"));
        }
        Ok(Samples { points })
    }

    pub fn from_fn(xs: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Samples::new(xs.iter().map(|&x| (x, f(x))).collect())
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn subset(&self, keep: impl Fn(usize) -> bool) -> Samples {
        Samples {
            points: self
                .points
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(*i))
                .map(|(_, p)| *p)
                .collect(),
        }
    }
}

/// Diagnostics of a least-squares expansion fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// `(alpha, k, coefficient)` in basis order.
    pub coefficients: Vec<(f64, u32, f64)>,
    pub rms_residual: f64,
    pub condition_estimate: f64,
    /// Constant-coefficient difference between two sub-grid refits.
    pub stability_delta: f64,
}

impl FitReport {
    pub fn coefficient(&self, alpha: f64, k: u32) -> Option<f64> {
        self.coefficients
            .iter()
            .find(|c| c.0 == alpha && c.1 == k)
            .map(|c| c.2)
    }

    /// The fitted coefficients as an expansion at infinity.
    pub fn to_expansion(&self, direction: Direction) -> Result<Expansion> {
        let terms = self
            .coefficients
            .iter()
            .map(|&(a, k, c)| ExpTerm::new(a, k, c))
            .collect();
        Expansion::with_terms(direction, terms)
    }
}

/// Fitting controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Largest acceptable condition number of the column-normalized design.
    pub condition_cap: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            condition_cap: 1e13,
        }
    }
}

fn solve_basis(s: &Samples, b: &BasisSpec, opts: &FitOptions) -> Result<lstsq::LstsqSolution> {
    let rows: Vec<Vec<f64>> = s
        .points
        .iter()
        .map(|&(x, _)| b.pairs.iter().map(|&(a, k)| basis_fn(a, k, x)).collect())
        .collect();
    let y: Vec<f64> = s.points.iter().map(|p| p.1).collect();
    lstsq::solve(&rows, &y, opts.condition_cap)
}

fn stability_delta(s: &Samples, b: &BasisSpec, opts: &FitOptions) -> Result<f64> {
    let Some(ci) = b.pairs.iter().position(|&(a, k)| a == 0.0 && k == 0) else {
        return Ok(0.0);
    };
    let nb = b.len();
    let (first, second) = if s.len().div_ceil(2) >= nb && s.len() / 2 >= nb {
        (s.subset(|i| i % 2 == 0), s.subset(|i| i % 2 == 1))
    } else {
        // too few points for interleaved halves: drop one sample at either end
        let last = s.len() - 1;
        (s.subset(|i| i != 0), s.subset(|i| i != last))
    };
    let c1 = solve_basis(&first, b, opts)?.coefficients[ci];
    let c2 = solve_basis(&second, b, opts)?.coefficients[ci];
    Ok(c1 - c2)
}

/// Least-squares fit of `samples` against the declared basis.
///
/// The stability delta is the difference of the constant coefficients fitted
/// on the even- and odd-indexed samples (or, when the halves would be too
/// short for the basis, on the samples without the first and without the
/// last point). It is zero when the basis has no constant term.
pub fn fit_expansion(s: &Samples, b: &BasisSpec) -> Result<(Vec<f64>, FitReport)> {
    fit_expansion_with(s, b, &FitOptions::default())
}

pub fn fit_expansion_with(
    s: &Samples,
    b: &BasisSpec,
    opts: &FitOptions,
) -> Result<(Vec<f64>, FitReport)> {
    b.validate()?;
    if s.len() < b.len() + 2 {
        return Err(Error::invalid(format!(
            "{} samples for a {}-term basis; need at least {}",
            s.len(),
            b.len(),
            b.len() + 2
        )));
    }
    let sol = solve_basis(s, b, opts)?;
    let delta = stability_delta(s, b, opts)?;
    let report = FitReport {
        coefficients: b
            .pairs
            .iter()
            .zip(&sol.coefficients)
            .map(|(&(a, k), &c)| (a, k, c))
            .collect(),
        rms_residual: sol.rms_residual,
        condition_estimate: sol.condition,
        stability_delta: delta,
    };
    Ok((sol.coefficients, report))
}

/// Regularized limit of sampled data: the fitted constant coefficient with
/// uncertainty `max(rms_residual, |stability_delta|)`.
pub fn extract_reglimit(s: &Samples, b: &BasisSpec) -> Result<(f64, f64)> {
    extract_reglimit_with(s, b, &FitOptions::default()).map(|(a, u, _)| (a, u))
}

pub fn extract_reglimit_with(
    s: &Samples,
    b: &BasisSpec,
    opts: &FitOptions,
) -> Result<(f64, f64, FitReport)> {
    if !b.contains(0.0, 0) {
        return Err(Error::invalid("regularized-limit basis must contain (0, 0)"));
    }
    let (_, report) = fit_expansion_with(s, b, opts)?;
    let a00 = report.coefficient(0.0, 0).unwrap_or(0.0);
    let unc = report.rms_residual.max(report.stability_delta.abs());
    Ok((a00, unc, report))
}
