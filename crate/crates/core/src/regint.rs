//! Hadamard finite-part integrals.
//!
//! `⨍_0^∞ f` is assembled from an adaptive quadrature over a finite window
//! `[a, A]` and the closed-form finite parts of expansions of `f` at `0` and
//! `∞`. The expansions are either supplied by the caller or fitted to samples
//! taken outside the window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Quadrature;
use crate::phg::{self, BasisSpec, Direction, ExpTerm, Expansion, Samples};

/// `∫ z^α log^k z dz`, the antiderivative normalized without constant.
pub fn antiderivative_term(alpha: f64, k: u32, x: f64) -> f64 {
    let l = x.ln();
    if alpha == -1.0 {
        return l.powi(k as i32 + 1) / f64::from(k + 1);
    }
    let a1 = alpha + 1.0;
    let mut sum = 0.0;
    // k!/(k-j)! built up incrementally
    let mut falling = 1.0;
    for j in 0..=k {
        if j > 0 {
            falling *= f64::from(k - j + 1);
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * falling * l.powi((k - j) as i32) / a1.powi(j as i32 + 1);
    }
    sum * x.powf(a1)
}

/// `⨍_A^∞ z^α log^k z dz = -F(A)`.
pub fn finite_part_tail_inf(alpha: f64, k: u32, anchor: f64) -> f64 {
    -antiderivative_term(alpha, k, anchor)
}

/// `⨍_0^a z^α log^k z dz = F(a)`.
pub fn finite_part_tail_zero(alpha: f64, k: u32, anchor: f64) -> f64 {
    antiderivative_term(alpha, k, anchor)
}

/// Side of the integration range a tail model describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Zero,
    Infinity,
}

/// Expansion of the integrand beyond a window endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub side: Side,
    pub expansion: Expansion,
    pub anchor: f64,
    /// RMS misfit of the expansion on the tail samples (0 if supplied).
    pub residual: f64,
}

impl TailModel {
    pub fn new(side: Side, expansion: Expansion, anchor: f64) -> Result<Self> {
        let want = match side {
            Side::Zero => Direction::ToZero,
            Side::Infinity => Direction::ToInfinity,
        };
        if expansion.direction() != want {
            return Err(Error::invalid("tail expansion direction does not match its side"));
        }
        if !(anchor > 0.0) {
            return Err(Error::invalid("tail anchor must be positive"));
        }
        Ok(TailModel {
            side,
            expansion,
            anchor,
            residual: 0.0,
        })
    }

    /// Finite part of the tail integral, term by term.
    pub fn finite_part(&self) -> f64 {
        self.expansion
            .terms()
            .iter()
            .map(|t| {
                t.coeff
                    * match self.side {
                        Side::Zero => finite_part_tail_zero(t.alpha, t.k, self.anchor),
                        Side::Infinity => finite_part_tail_inf(t.alpha, t.k, self.anchor),
                    }
            })
            .sum()
    }
}

/// Breakdown of a regularized integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegIntResult {
    pub value: f64,
    pub core_part: f64,
    pub tail_zero_part: f64,
    pub tail_inf_part: f64,
    pub error_estimate: f64,
}

impl RegIntResult {
    fn assemble(core: f64, zero: f64, inf: f64, err: f64) -> Self {
        RegIntResult {
            value: core + zero + inf,
            core_part: core,
            tail_zero_part: zero,
            tail_inf_part: inf,
            error_estimate: err,
        }
    }
}

/// An integrand on `(0, ∞)` with optional known expansions at either end.
pub struct IntegrandHandle<'a> {
    evaluator: &'a (dyn Fn(f64) -> f64 + Sync),
    pub expansion_zero: Option<Expansion>,
    pub expansion_inf: Option<Expansion>,
}

impl<'a> IntegrandHandle<'a> {
    pub fn new(evaluator: &'a (dyn Fn(f64) -> f64 + Sync)) -> Self {
        IntegrandHandle {
            evaluator,
            expansion_zero: None,
            expansion_inf: None,
        }
    }

    pub fn with_zero(mut self, e: Expansion) -> Self {
        self.expansion_zero = Some(e);
        self
    }

    pub fn with_inf(mut self, e: Expansion) -> Self {
        self.expansion_inf = Some(e);
        self
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }
}

/// Controls for tail fitting and quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegIntOptions {
    pub quad_tol: f64,
    /// Ratio between successive tail sample points.
    pub tail_ratio: f64,
    /// Number of tail sample points (raised to `2|basis| + 4` if smaller).
    pub tail_samples: usize,
    /// Largest acceptable RMS tail misfit relative to the largest sample.
    pub tail_threshold: f64,
}

impl Default for RegIntOptions {
    fn default() -> Self {
        RegIntOptions {
            quad_tol: 1e-10,
            tail_ratio: std::f64::consts::SQRT_2,
            tail_samples: 16,
            tail_threshold: 1e-7,
        }
    }
}

/// Default integration window.
pub const DEFAULT_WINDOW: (f64, f64) = (1e-3, 64.0);

/// Fits `basis` to samples of `f` beyond `anchor` on the given side.
pub fn fit_tail(
    f: &dyn Fn(f64) -> f64,
    side: Side,
    anchor: f64,
    basis: &BasisSpec,
    opts: &RegIntOptions,
) -> Result<TailModel> {
    let count = opts.tail_samples.max(2 * basis.len() + 4);
    let mut xs: Vec<f64> = (0..count)
        .map(|j| match side {
            Side::Infinity => anchor * opts.tail_ratio.powi(j as i32),
            Side::Zero => anchor / opts.tail_ratio.powi(j as i32),
        })
        .collect();
    xs.sort_by(f64::total_cmp);
    let samples = Samples::from_fn(&xs, f)?;
    let (coeffs, report) = phg::fit_expansion(&samples, basis)?;
    let scale = samples
        .points()
        .iter()
        .map(|p| p.1.abs())
        .fold(0.0, f64::max);
    let rel = if scale > 0.0 {
        report.rms_residual / scale
    } else {
        0.0
    };
    if rel > opts.tail_threshold {
        return Err(Error::TailModelInadequate {
            side: match side {
                Side::Zero => "zero",
                Side::Infinity => "infinity",
            },
            residual: rel,
            threshold: opts.tail_threshold,
        });
    }
    let terms = basis
        .pairs
        .iter()
        .zip(&coeffs)
        .map(|(&(a, k), &c)| ExpTerm::new(a, k, c))
        .collect();
    let direction = match side {
        Side::Zero => Direction::ToZero,
        Side::Infinity => Direction::ToInfinity,
    };
    let mut model = TailModel::new(side, Expansion::with_terms(direction, terms)?, anchor)?;
    model.residual = report.rms_residual;
    Ok(model)
}

fn tail_model(
    f: &IntegrandHandle<'_>,
    side: Side,
    anchor: f64,
    basis: &BasisSpec,
    opts: &RegIntOptions,
) -> Result<TailModel> {
    let known = match side {
        Side::Zero => f.expansion_zero.as_ref(),
        Side::Infinity => f.expansion_inf.as_ref(),
    };
    match known {
        Some(e) => TailModel::new(side, e.clone(), anchor),
        None => fit_tail(&|x| f.eval(x), side, anchor, basis, opts),
    }
}

/// `⨍_0^∞ f` over the window `[a, A]`.
///
/// The error estimate adds the quadrature estimate to each tail's RMS misfit
/// times its anchor.
pub fn reg_integral(
    f: &IntegrandHandle<'_>,
    window: (f64, f64),
    basis_zero: &BasisSpec,
    basis_inf: &BasisSpec,
    opts: &RegIntOptions,
) -> Result<RegIntResult> {
    let (a, big_a) = window;
    if !(a > 0.0 && a < big_a && big_a.is_finite()) {
        return Err(Error::invalid(format!("window [{a}, {big_a}] must satisfy 0 < a < A")));
    }
    let q = Quadrature::new(opts.quad_tol, opts.quad_tol).with_max_intervals(20_000);
    let core = q.integrate(|x| f.eval(x), a, big_a)?;
    let zero = tail_model(f, Side::Zero, a, basis_zero, opts)?;
    let inf = tail_model(f, Side::Infinity, big_a, basis_inf, opts)?;
    let err = core.error + zero.residual * a + inf.residual * big_a;
    Ok(RegIntResult::assemble(
        core.value,
        zero.finite_part(),
        inf.finite_part(),
        err,
    ))
}

/// `⨍_A^∞ f` with the quadrature window `[lower, A]`.
pub fn reg_integral_to_inf(
    f: &IntegrandHandle<'_>,
    lower: f64,
    upper: f64,
    basis_inf: &BasisSpec,
    opts: &RegIntOptions,
) -> Result<RegIntResult> {
    if !(lower > 0.0 && lower < upper && upper.is_finite()) {
        return Err(Error::invalid("window must satisfy 0 < lower < upper"));
    }
    let q = Quadrature::new(opts.quad_tol, opts.quad_tol).with_max_intervals(20_000);
    let core = q.integrate(|x| f.eval(x), lower, upper)?;
    let inf = tail_model(f, Side::Infinity, upper, basis_inf, opts)?;
    Ok(RegIntResult::assemble(
        core.value,
        0.0,
        inf.finite_part(),
        core.error + inf.residual * upper,
    ))
}

/// `{z^{-1}, z^{-3}, …}` with `terms` entries: the large-z shape of
/// `z^{2m-1} Tr(Δ_n + z²)^{-m}` on a finite spectrum.
pub fn odd_inverse_basis(terms: usize) -> BasisSpec {
    let pairs = (0..terms).map(|j| (-(2.0 * j as f64 + 1.0), 0)).collect();
    BasisSpec::new(pairs).expect("distinct pairs")
}

/// Options for the determinant route through the regularized integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogDetOptions {
    pub regint: RegIntOptions,
    /// Upper end of the quadrature window on `[1, A]`.
    pub upper: f64,
    /// Tail basis at infinity for `z^{2m-1}·trace(z)`.
    pub tail_basis: BasisSpec,
}

impl Default for LogDetOptions {
    fn default() -> Self {
        LogDetOptions {
            regint: RegIntOptions::default(),
            upper: DEFAULT_WINDOW.1,
            tail_basis: odd_inverse_basis(6),
        }
    }
}

/// Breakdown of the determinant route through `⨍_0^∞ z^{2m-1} trace(z) dz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDetViaRegInt {
    /// `regularized_integral + harmonic_correction`.
    pub value: f64,
    /// `-2 ⨍_0^∞ z^{2m-1} trace(z) dz`.
    pub regularized_integral: f64,
    /// `-H_{m-1} · ζ(0)`, zero for `m = 1`.
    pub harmonic_correction: f64,
    /// `ζ(0)`, read off as the fitted `z^{-1}` tail coefficient minus
    /// `kernel_dim`.
    pub zeta_at_zero: f64,
    /// `∫_0^1 z^{2m-1}(trace - kernel_dim·z^{-2m})`.
    pub near_zero: f64,
    /// `kernel_dim · ⨍_0^1 z^{-1}`, which is zero.
    pub kernel_part: f64,
    /// `⨍_1^∞ z^{2m-1} trace`.
    pub far: RegIntResult,
    pub error_estimate: f64,
}

/// `H_k = 1 + 1/2 + … + 1/k`.
pub fn harmonic(k: u32) -> f64 {
    (1..=k).map(|j| 1.0 / f64::from(j)).sum()
}

/// Log-determinant from `⨍_0^∞ z^{2m-1} Tr(L + z²)^{-m} dz`.
///
/// `trace(z)` must return `Tr(L + z²)^{-m}`, behaving like
/// `kernel_dim · z^{-2m}` as `z → 0`. The kernel contribution is split off on
/// `(0, 1]`, where its finite part vanishes; the remaining piece is a proper
/// integral. On `[1, ∞)` the finite part uses `opts.tail_basis` fitted beyond
/// `opts.upper`.
///
/// For a single eigenvalue, `-2 ⨍_0^∞ z^{2m-1}(λ+z²)^{-m} dz = log λ + H_{m-1}`,
/// so for `m ≥ 2` the integration by parts leaves the constant
/// `H_{m-1} ζ(0)` behind. It is removed here, with `ζ(0)` taken from the
/// `z^{-1}` coefficient of the fitted tail, which must then be in the basis.
pub fn logdet_via_regint(
    trace: &(dyn Fn(f64) -> f64 + Sync),
    m: u32,
    kernel_dim: u32,
    opts: &LogDetOptions,
) -> Result<LogDetViaRegInt> {
    if m == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if !(opts.upper > 1.0) {
        return Err(Error::invalid("upper window end must exceed 1"));
    }
    if m >= 2 && !opts.tail_basis.contains(-1.0, 0) {
        return Err(Error::invalid("for m ≥ 2 the tail basis must contain z^-1"));
    }
    let p = 2 * m as i32 - 1;
    let kd = f64::from(kernel_dim);
    let q = Quadrature::new(opts.regint.quad_tol, opts.regint.quad_tol).with_max_intervals(20_000);
    let near = q.integrate(
        |z| {
            if z == 0.0 {
                return 0.0;
            }
            z.powi(p) * trace(z) - kd / z
        },
        0.0,
        1.0,
    )?;
    let kernel_part = kd * finite_part_tail_zero(-1.0, 0, 1.0);
    let g = |z: f64| z.powi(p) * trace(z);
    let handle = IntegrandHandle::new(&g);
    let core = q.integrate(g, 1.0, opts.upper)?;
    let tail = tail_model(&handle, Side::Infinity, opts.upper, &opts.tail_basis, &opts.regint)?;
    let far = RegIntResult::assemble(
        core.value,
        0.0,
        tail.finite_part(),
        core.error + tail.residual * opts.upper,
    );
    let regularized_integral = -2.0 * (near.value + kernel_part + far.value);
    let zeta_at_zero = tail.expansion.coefficient(-1.0, 0) - kd;
    let harmonic_correction = if m == 1 {
        0.0
    } else {
        -harmonic(m - 1) * zeta_at_zero
    };
    Ok(LogDetViaRegInt {
        value: regularized_integral + harmonic_correction,
        regularized_integral,
        harmonic_correction,
        zeta_at_zero,
        near_zero: near.value,
        kernel_part,
        far,
        error_estimate: 2.0 * (near.error + far.error_estimate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn antiderivative_examples() {
        for x in [0.3, 1.0, 7.5] {
            assert!((antiderivative_term(0.0, 0, x) - x).abs() < 1e-15);
            let want = x * x / 2.0 * x.ln() - x * x / 4.0;
            assert!((antiderivative_term(1.0, 1, x) - want).abs() < 1e-14);
        }
        assert!((antiderivative_term(-1.0, 0, E * E) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn finite_part_examples() {
        assert!((finite_part_tail_inf(-2.0, 0, 2.0) - 0.5).abs() < 1e-15);
        assert!((finite_part_tail_inf(0.0, 0, 3.0) + 3.0).abs() < 1e-15);
        assert!((finite_part_tail_inf(-1.0, 0, E) + 1.0).abs() < 1e-15);
        assert!((finite_part_tail_zero(0.0, 0, 1.0) - 1.0).abs() < 1e-15);
        assert!((finite_part_tail_zero(-2.0, 0, 1.0) + 1.0).abs() < 1e-15);
        assert_eq!(finite_part_tail_zero(-1.0, 0, 1.0), 0.0);
    }

    #[test]
    fn convergent_integrand() {
        let f = |z: f64| 1.0 / (1.0 + z * z);
        let h = IntegrandHandle::new(&f);
        let bz = BasisSpec::new(vec![(0.0, 0), (2.0, 0), (4.0, 0)]).unwrap();
        let bi = BasisSpec::new(vec![(-2.0, 0), (-4.0, 0), (-6.0, 0)]).unwrap();
        let r = reg_integral(&h, (1e-3, 50.0), &bz, &bi, &RegIntOptions::default()).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-8, "{}", r.value - PI / 2.0);
        assert_eq!(r.value, r.core_part + r.tail_zero_part + r.tail_inf_part);
    }

    #[test]
    fn inadequate_tail_is_reported() {
        let f = |z: f64| (1.0 + z).sqrt();
        let h = IntegrandHandle::new(&f);
        let bz = BasisSpec::new(vec![(0.0, 0), (1.0, 0)]).unwrap();
        let bi = BasisSpec::new(vec![(1.0, 0), (0.0, 0)]).unwrap();
        let err = reg_integral(&h, (1e-3, 50.0), &bz, &bi, &RegIntOptions::default()).unwrap_err();
        assert!(matches!(err, Error::TailModelInadequate { .. }));
    }

    #[test]
    fn single_eigenvalue_logdet() {
        for lambda in [1.0, 4.0] {
            let trace = move |z: f64| 1.0 / (lambda + z * z);
            let r = logdet_via_regint(&trace, 1, 0, &LogDetOptions::default()).unwrap();
            assert!((r.value - f64::ln(lambda)).abs() < 1e-9, "{}", r.value);
        }
    }

    #[test]
    fn harmonic_constant_for_higher_powers() {
        // -2 ⨍ z³/(λ+z²)² = log λ + 1; the correction removes the 1
        let lambda = 3.0;
        let trace = move |z: f64| (lambda + z * z).powi(-2);
        let r = logdet_via_regint(&trace, 2, 0, &LogDetOptions::default()).unwrap();
        assert!((r.regularized_integral - f64::ln(lambda) - 1.0).abs() < 1e-8);
        assert!((r.zeta_at_zero - 1.0).abs() < 1e-8);
        assert!((r.value - f64::ln(lambda)).abs() < 1e-8);
    }
}
