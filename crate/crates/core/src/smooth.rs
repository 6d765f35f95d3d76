//! The continuum torus `R^m / 2πZ^m`: heat trace, spectral zeta function,
//! zeta-regularized determinant and resolvent traces.
//!
//! The spectrum is `|k|²`, `k ∈ Z^m`, so the heat trace is `θ₁(t)^m` with
//! `θ₁(t) = Σ_j e^{-t j²}`. Every Mellin integral is split at `t = 1` and the
//! piece over `(0, 1)` is rewritten with the modular identity
//! `θ₁(t) = √(π/t) θ₁(π²/t)`, so theta is only ever summed at arguments
//! `≥ 1`, where three or four terms suffice.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::discrete::{resolvent_trace, DiscreteTorus};
use crate::error::{Error, Result};
use crate::numerics::Quadrature;
use crate::regint::{logdet_via_regint, LogDetOptions, LogDetViaRegInt, RegIntOptions};
use crate::phg::BasisSpec;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Quadrature tolerance used inside the theta/Mellin routes.
const QUAD_TOL: f64 = 1e-14;

/// Continuum torus of dimension `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuumTorus {
    m: u32,
}

impl ContinuumTorus {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 || m > crate::discrete::MAX_DIM {
            return Err(Error::invalid(format!("dimension m = {m} outside 1..=4")));
        }
        Ok(ContinuumTorus { m })
    }

    pub fn m(&self) -> u32 {
        self.m
    }
}

/// `2 Σ_{j≥1} e^{-t j²}`, for `t ≥ 1`.
fn theta1_tail_direct(t: f64) -> f64 {
    let mut s = 0.0;
    let mut j = 1.0f64;
    loop {
        let term = (-t * j * j).exp();
        s += term;
        if !(term >= 1e-18 * s) || term == 0.0 {
            break;
        }
        j += 1.0;
    }
    2.0 * s
}

/// `θ₁(t) = Σ_{j∈Z} e^{-t j²}`.
pub fn theta1(t: f64) -> f64 {
    if t >= 1.0 {
        1.0 + theta1_tail_direct(t)
    } else {
        (PI / t).sqrt() * (1.0 + theta1_tail_direct(PI * PI / t))
    }
}

/// `θ₁(t)` by direct summation at any `t > 0` (slow for small `t`; test oracle
/// for the modular identity).
pub fn theta1_direct(t: f64) -> f64 {
    let mut s = 1.0;
    let mut j = 1.0f64;
    loop {
        let term = 2.0 * (-t * j * j).exp();
        s += term;
        if !(term >= 1e-18 * s) {
            return s;
        }
        j += 1.0;
    }
}

/// Heat trace `θ(t) = θ₁(t)^m` of the `m`-torus.
pub fn theta_function(m: u32, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("theta argument t = {t} must be positive")));
    }
    Ok(theta1(t).powi(m as i32))
}

/// `θ(t) - 1` without cancellation, for `t ≥ 1`.
fn theta_minus_one(m: u32, t: f64) -> f64 {
    let e = theta1_tail_direct(t);
    // (1 + e)^m - 1 = Σ_{i≥1} C(m,i) e^i
    let mut s = 0.0;
    let mut binom = 1.0;
    let mut pow = 1.0;
    for i in 1..=m {
        binom *= f64::from(m - i + 1) / f64::from(i);
        pow *= e;
        s += binom * pow;
    }
    s
}

/// Upper integration limit beyond which `t^p e^{-c t}` is below `1e-30` of its
/// size at `t = lower`.
fn decay_limit(lower: f64, p: f64, c: f64) -> f64 {
    let mut hi = lower + 1.0 / c;
    let log_at = |t: f64| p * t.ln() - c * t;
    let base = log_at(lower).max(log_at((p / c).max(lower)));
    while log_at(hi) > base - 70.0 {
        hi = lower + 2.0 * (hi - lower);
    }
    hi
}

fn quad() -> Quadrature {
    Quadrature::new(0.0, QUAD_TOL).with_max_intervals(2000)
}

/// `∫_{lo}^∞ t^{p} (θ(t) - 1) dt` for `lo ≥ 1`.
fn theta_moment(m: u32, p: f64, lo: f64) -> Result<f64> {
    let hi = decay_limit(lo, p, 1.0);
    let q = Quadrature::new(1e-300, QUAD_TOL).with_max_intervals(2000);
    Ok(q.integrate(|t| t.powf(p) * theta_minus_one(m, t), lo, hi)?.value)
}

/// Spectral zeta function `ζ(s) = Σ'_{k} |k|^{-2s}`, continued to real `s`
/// away from the poles `s = 0` (removable here) and `s = m/2`.
pub fn zeta_function(m: u32, s: f64) -> Result<f64> {
    let half = f64::from(m) / 2.0;
    if s == 0.0 {
        return Err(Error::invalid("use zeta_at_zero for s = 0"));
    }
    if (s - half).abs() < 1e-12 {
        return Err(Error::invalid(format!("ζ has a pole at s = {half}")));
    }
    if s <= -1.0 && s.fract() == 0.0 {
        // 1/Γ(s) vanishes at negative integers
        return Err(Error::invalid("negative integer s not supported"));
    }
    let pm = PI.powf(half);
    let i1 = theta_moment(m, s - 1.0, 1.0)?;
    let i2 = theta_moment(m, half - s - 1.0, PI * PI)?;
    let gamma_zeta = pm / (s - half) - 1.0 / s + i1 + PI.powf(2.0 * s - half) * i2;
    Ok(gamma_zeta / statrs::function::gamma::gamma(s))
}

/// `ζ(0)` from the same continuation, as the symmetric limit `s → 0`.
pub fn zeta_at_zero(m: u32) -> Result<f64> {
    let h = 1e-6;
    Ok(0.5 * (zeta_function(m, h)? + zeta_function(m, -h)?))
}

/// `log det_ζ Δ = -ζ'(0)`:
/// `γ + 2π^{m/2}/m - ∫_1^∞ (θ-1)/t dt - π^{-m/2} ∫_{π²}^∞ u^{m/2-1}(θ-1) du`.
pub fn log_det_zeta(m: u32) -> Result<f64> {
    ContinuumTorus::new(m)?;
    let half = f64::from(m) / 2.0;
    let i1 = theta_moment(m, -1.0, 1.0)?;
    let i2 = theta_moment(m, half - 1.0, PI * PI)?;
    Ok(EULER_GAMMA + 2.0 * PI.powf(half) / f64::from(m) - i1 - PI.powf(-half) * i2)
}

/// `log(Γ(1/4)⁴ / (4π))`, the closed form of `log det_ζ` for `m = 2`.
pub fn log_det_zeta_closed_form_2d() -> f64 {
    4.0 * statrs::function::gamma::ln_gamma(0.25) - (4.0 * PI).ln()
}

/// `Tr(Δ + z²)^{-α} = Σ_{k∈Z^m} (|k|² + z²)^{-α}` for integer `α > m/2`.
///
/// Mellin representation `Γ(α)^{-1} ∫_0^∞ t^{α-1} e^{-t z²} θ(t) dt`, split at
/// `t = 1`; on `(0,1)` the substitution `t = u²` and the modular identity give
/// the smooth integrand `2π^{m/2} u^{2α-1-m} e^{-u²z²} θ₁(π²/u²)^m`.
pub fn resolvent_trace_continuum(m: u32, z: f64, alpha: u32) -> Result<f64> {
    ContinuumTorus::new(m)?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::invalid(format!("z = {z} must be positive")));
    }
    if 2 * alpha <= m {
        return Err(Error::invalid(format!(
            "lattice sum diverges for alpha = {alpha} <= m/2 = {}",
            f64::from(m) / 2.0
        )));
    }
    let z2 = z * z;
    let a = f64::from(alpha);
    let gamma_a = statrs::function::gamma::gamma(a);
    let pm = PI.powf(f64::from(m) / 2.0);
    let power = (2 * alpha - 1 - m) as i32;
    let near = quad()
        .integrate(
            |u| {
                if u == 0.0 {
                    return if power == 0 { 2.0 * pm } else { 0.0 };
                }
                let th = 1.0 + theta1_tail_direct(PI * PI / (u * u));
                2.0 * pm * u.powi(power) * (-u * u * z2).exp() * th.powi(m as i32)
            },
            0.0,
            1.0,
        )?
        .value;
    let hi = decay_limit(1.0, a - 1.0, 1.0 + z2);
    let far = Quadrature::new(1e-300, QUAD_TOL)
        .with_max_intervals(2000)
        .integrate(|t| t.powf(a - 1.0) * (-t * z2).exp() * theta_minus_one(m, t), 1.0, hi)?
        .value;
    // Γ(α)^{-1} ∫_1^∞ t^{α-1} e^{-t z²} dt = z^{-2α} e^{-z²} Σ_{j<α} z^{2j}/j!
    let mut poly = 0.0;
    let mut term = 1.0;
    for j in 0..alpha {
        if j > 0 {
            term *= z2 / f64::from(j);
        }
        poly += term;
    }
    let kernel_far = z2.powi(-(alpha as i32)) * (-z2).exp() * poly;
    Ok((near + far) / gamma_a + kernel_far)
}

/// Determinant through `-2 ⨍_0^∞ z^{2m-1} Tr(Δ + z²)^{-m} dz`.
///
/// At large `z` the integrand is `π^{m/2} Γ(m/2)/Γ(m) · z^{m-1}` up to
/// exponentially small terms. The tail basis is `{z^{m-1}, z^{-1}, z^{m-3}}`;
/// the `z^{-1}` coefficient carries `ζ(0) + 1` and should fit to zero.
pub fn logdet_zeta_via_regint(m: u32) -> Result<LogDetViaRegInt> {
    if m == 0 || m > 2 {
        return Err(Error::invalid("the regularized-integral route supports m ≤ 2"));
    }
    let lead = f64::from(m) - 1.0;
    let opts = LogDetOptions {
        regint: RegIntOptions {
            quad_tol: 1e-11,
            ..RegIntOptions::default()
        },
        upper: 8.0,
        tail_basis: {
            let mut pairs = vec![(lead, 0), (-1.0, 0)];
            if lead - 2.0 != -1.0 {
                pairs.push((lead - 2.0, 0));
            }
            BasisSpec::new(pairs)?
        },
    };
    let trace = move |z: f64| resolvent_trace_continuum(m, z, m).unwrap_or(f64::NAN);
    logdet_via_regint(&trace, m, 1, &opts)
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub discrete: f64,
    pub continuum: f64,
    /// `continuum - discrete`.
    pub difference: f64,
}

/// Discrete-to-continuum convergence of resolvent traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub m: u32,
    pub z: f64,
    pub alpha: u32,
    pub rows: Vec<ConvergenceRow>,
    /// `|difference|` strictly decreasing along the grid.
    pub strictly_decreasing: bool,
    pub final_abs_difference: f64,
    pub final_tolerance: f64,
    pub final_within_tolerance: bool,
    /// Relative mismatch between a central difference of `∂_z Tr_α` and
    /// `-2αz Tr_{α+1}` for the continuum trace.
    pub derivative_residual_continuum: f64,
    /// The same for the discrete trace at the largest `n`.
    pub derivative_residual_discrete: f64,
    pub derivative_tolerance: f64,
    pub pass: bool,
}

/// Central difference with Richardson extrapolation (error `O(h^4)`).
fn derivative(f: impl Fn(f64) -> Result<f64>, x: f64) -> Result<f64> {
    let h = 1e-3 * x.max(1e-3);
    let d1 = (f(x + h)? - f(x - h)?) / (2.0 * h);
    let d2 = (f(x + h / 2.0)? - f(x - h / 2.0)?) / h;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Tabulates `Tr(Δ_n + z²)^{-α}` against `Tr(Δ + z²)^{-α}` over `ns`.
pub fn convergence_check(
    m: u32,
    ns: &[u32],
    z: f64,
    alpha: u32,
    final_tolerance: f64,
) -> Result<ConvergenceReport> {
    if ns.is_empty() {
        return Err(Error::invalid("empty n grid"));
    }
    if alpha < m {
        return Err(Error::invalid("convergence check requires alpha ≥ m"));
    }
    let cont = resolvent_trace_continuum(m, z, alpha)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let t = DiscreteTorus::new(m, n)?;
        let d = resolvent_trace(&t, z, alpha)?;
        rows.push(ConvergenceRow {
            n,
            discrete: d,
            continuum: cont,
            difference: cont - d,
        });
    }
    let strictly_decreasing = rows
        .windows(2)
        .all(|w| w[1].difference.abs() < w[0].difference.abs());
    let last = rows.last().expect("non-empty");
    let final_abs_difference = last.difference.abs();
    let derivative_tolerance = 1e-6;
    let a = f64::from(alpha);
    let dc = derivative(|x| resolvent_trace_continuum(m, x, alpha), z)?;
    let want = -2.0 * a * z * resolvent_trace_continuum(m, z, alpha + 1)?;
    let derivative_residual_continuum = ((dc - want) / want).abs();
    let t = DiscreteTorus::new(m, last.n)?;
    let dd = derivative(|x| resolvent_trace(&t, x, alpha), z)?;
    let want = -2.0 * a * z * resolvent_trace(&t, z, alpha + 1)?;
    let derivative_residual_discrete = ((dd - want) / want).abs();
    let final_within_tolerance = final_abs_difference <= final_tolerance;
    let pass = strictly_decreasing
        && final_within_tolerance
        && derivative_residual_continuum <= derivative_tolerance
        && derivative_residual_discrete <= derivative_tolerance;
    Ok(ConvergenceReport {
        m,
        z,
        alpha,
        rows,
        strictly_decreasing,
        final_abs_difference,
        final_tolerance,
        final_within_tolerance,
        derivative_residual_continuum,
        derivative_residual_discrete,
        derivative_tolerance,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_values() {
        assert!((theta1(50.0) - 1.0).abs() < 1e-20);
        let want = PI.powf(0.25) / statrs::function::gamma::gamma(0.75);
        assert!((theta1(PI) - want).abs() < 1e-14);
        assert!((theta1(PI) - 1.086_434_811_213_308).abs() < 1e-14);
        for t in [0.1, 0.37, 1.0, 2.5, 10.0] {
            let modular = (PI / t).sqrt() * theta1_direct(PI * PI / t);
            assert!((theta1_direct(t) - modular).abs() <= 1e-14 * theta1_direct(t));
            assert!((theta1(t) - theta1_direct(t)).abs() <= 1e-14 * theta1(t));
        }
    }

    #[test]
    fn zeta_special_values() {
        // m = 1: ζ(s) = 2 ζ_R(2s)
        let z = zeta_function(1, 1.0).unwrap();
        assert!((z - PI * PI / 3.0).abs() < 1e-12, "{z}");
        // m = 2: ζ(s) = 4 ζ_R(s) β(s); at s = 2, 4 · π²/6 · Catalan
        let catalan = 0.915_965_594_177_219;
        let z = zeta_function(2, 2.0).unwrap();
        assert!((z - 4.0 * PI * PI / 6.0 * catalan).abs() < 1e-12, "{z}");
        for m in 1..=4 {
            assert!((zeta_at_zero(m).unwrap() + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn determinant_closed_forms() {
        let d1 = log_det_zeta(1).unwrap();
        assert!((d1 - 2.0 * (2.0 * PI).ln()).abs() < 1e-13, "{d1}");
        let d2 = log_det_zeta(2).unwrap();
        assert!((d2 - log_det_zeta_closed_form_2d()).abs() < 1e-13, "{d2}");
        assert!((d2 - 2.621_065_851_823_019).abs() < 1e-12);
    }

    #[test]
    fn zeta_derivative_matches_determinant() {
        for m in 1..=3 {
            let h = 1e-5;
            let d = (zeta_function(m, h).unwrap() - zeta_function(m, -h).unwrap()) / (2.0 * h);
            let want = log_det_zeta(m).unwrap();
            assert!((-d - want).abs() < 1e-7, "m={m}: {} vs {want}", -d);
        }
    }

    #[test]
    fn one_dimensional_trace_closed_form() {
        for z in [0.1, 0.5, 1.0, 3.0, 17.0, 50.0] {
            let want = PI / (PI * z).tanh() / z;
            let got = resolvent_trace_continuum(1, z, 1).unwrap();
            assert!((got - want).abs() <= 1e-12 * want, "z={z}: {got} vs {want}");
        }
    }

    #[test]
    fn trace_rejects_divergent_parameters() {
        assert!(resolvent_trace_continuum(2, 1.0, 1).is_err());
        assert!(resolvent_trace_continuum(1, 0.0, 1).is_err());
    }

    #[test]
    fn large_z_sees_only_the_kernel() {
        let z: f64 = 40.0;
        // m = 1, α = 2: z⁴ Tr → 1 + corrections of order z^{-1}
        let v = resolvent_trace_continuum(1, z, 2).unwrap() * z.powi(4);
        let want = PI / 2.0 * z.powi(1) + 1.0; // Weyl term dominates
        assert!(v > 0.0 && (v / want - 1.0).abs() < 0.05);
    }
}
