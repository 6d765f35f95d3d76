//! Euler–Maclaurin decomposition of the lattice sums behind the discrete
//! resolvent trace.
//!
//! Along one axis, `Σ_{x=0}^{n} u(x)` splits into the integral (β=1), the
//! Bernoulli-weighted boundary derivatives (β=2), the periodic-Bernoulli
//! remainder (β=3) and the endpoint average (β=4). In `m` axes the operators
//! compose, giving `4^m` patterns.

pub mod bernoulli;
pub mod hfunc;

use std::cell::RefCell;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrete::{extended_grid_sum, resolvent_trace, DiscreteTorus};
use crate::error::{Error, Result};
use crate::numerics::Quadrature;

pub use bernoulli::{bernoulli_number, bernoulli_polynomial, periodic_bernoulli, BernoulliTable};
pub use hfunc::{derivative_via_h, g_derivatives, h_recursion_eval, omega_axis, HPoly, HTable};

use bernoulli::{to_f64, PeriodicBernoulli};

/// Largest dimension for the full pattern decomposition.
pub const MAX_DECOMPOSITION_DIM: u32 = 2;

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

fn quad() -> Quadrature {
    Quadrature::new(1e-15, 1e-12).with_max_intervals(20_000)
}

/// `⌈(3m+1)/2⌉`, the smallest admissible truncation order.
pub fn default_order(m: u32) -> u32 {
    (3 * m + 1).div_ceil(2)
}

/// The four pieces of the one-axis formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmParts {
    pub integral: f64,
    pub derivative_boundary: f64,
    pub endpoint_average: f64,
    pub remainder: f64,
}

impl EmParts {
    pub fn total(&self) -> f64 {
        self.integral + self.derivative_boundary + self.endpoint_average + self.remainder
    }
}

/// `Σ_{x=0}^{n} u(x)` as the four Euler–Maclaurin pieces of order `M`.
///
/// `u(k, x)` must return the `k`-th derivative of `u` at `x` for
/// `k ≤ 2M + 1`.
pub fn em_sum_1d(u: &dyn Fn(u32, f64) -> f64, n: u32, order: u32) -> Result<EmParts> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let table = BernoulliTable::new(order)?;
    let nf = f64::from(n);
    let q = quad();
    let integral = q.integrate(|x| u(0, x), 0.0, nf)?.value;
    let mut derivative_boundary = 0.0;
    for k in 1..=order {
        let b = to_f64(table.get(2 * k as usize).expect("in table"));
        let d = u(2 * k - 1, nf) - u(2 * k - 1, 0.0);
        derivative_boundary += b / factorial(2 * k) * d;
    }
    let endpoint_average = 0.5 * (u(0, nf) + u(0, 0.0));
    let top = 2 * order + 1;
    let pb = PeriodicBernoulli::new(top as usize)?;
    let breaks: Vec<f64> = (0..=n).map(f64::from).collect();
    let remainder = q
        .integrate_with_breaks(|x| pb.eval(x) * u(top, x), &breaks)?
        .value
        / factorial(top);
    Ok(EmParts {
        integral,
        derivative_boundary,
        endpoint_average,
        remainder,
    })
}

/// Evaluation context for patterns applied to `(Σ_j ω(n, x_j) + z²)^{-α}`.
struct Context {
    n: f64,
    z2: f64,
    order: u32,
    alpha: u32,
    /// `tables[a - alpha]` for exponents `a = α, α+1, …`.
    tables: Vec<HTable>,
    bernoulli: Vec<f64>,
    remainder_poly: PeriodicBernoulli,
}

impl Context {
    fn new(n: f64, z: f64, alpha: u32, order: u32, axes: u32) -> Result<Self> {
        let top = 2 * order + 1;
        // each differentiated axis can raise the exponent by up to `top`
        let tables = (0..=axes * top)
            .map(|s| HTable::new(f64::from(alpha + s), top))
            .collect();
        let bt = BernoulliTable::new(order)?;
        Ok(Context {
            n,
            z2: z * z,
            order,
            alpha,
            tables,
            bernoulli: bt.values().iter().map(to_f64).collect(),
            remainder_poly: PeriodicBernoulli::new(top as usize)?,
        })
    }

    /// Pushes one axis at `x` with derivative order `k` onto the pending list
    /// of `(coefficient, exponent)` pairs.
    fn differentiate(&self, pending: &[(f64, u32)], x: f64, k: u32) -> Vec<(f64, u32)> {
        if k == 0 {
            return pending.to_vec();
        }
        let gd = g_derivatives(self.n, x, k);
        let mut out = Vec::with_capacity(pending.len() * k as usize);
        for &(c, a) in pending {
            let t = &self.tables[(a - self.alpha) as usize];
            for l in 0..k {
                let h = t.poly(k, l).expect("in range").eval(&gd);
                if h != 0.0 {
                    out.push((c * h, a + l + 1));
                }
            }
        }
        out
    }

    fn finish(&self, pending: &[(f64, u32)], omega_sum: f64) -> f64 {
        let f = omega_sum + self.z2;
        pending.iter().map(|&(c, a)| c * f.powi(-(a as i32))).sum()
    }

    /// Applies the remaining axes of `pattern` (in `axes` order) at axis depth `d`.
    fn apply(&self, pattern: &[u8], axes: &[usize], d: usize, pending: &[(f64, u32)], omega_sum: f64) -> Result<f64> {
        if d == axes.len() {
            return Ok(self.finish(pending, omega_sum));
        }
        let n = self.n;
        let at = |x: f64, k: u32| -> Result<f64> {
            let next = self.differentiate(pending, x, k);
            if next.is_empty() {
                return Ok(0.0);
            }
            self.apply(pattern, axes, d + 1, &next, omega_sum + omega_axis(n, x))
        };
        match pattern[axes[d]] {
            1 => self.integrate(|x| at(x, 0), &[0.0, 0.5 * n, n], axes.len() - d),
            2 => {
                let mut s = 0.0;
                for k in 1..=self.order {
                    let b = self.bernoulli[2 * k as usize] / factorial(2 * k);
                    s += b * (at(n, 2 * k - 1)? - at(0.0, 2 * k - 1)?);
                }
                Ok(s)
            }
            3 => {
                let top = 2 * self.order + 1;
                let steps = n.ceil() as usize;
                let mut breaks: Vec<f64> = (0..steps).map(|i| i as f64).collect();
                breaks.push(n);
                let v = self.integrate(
                    |x| Ok(self.remainder_poly.eval(x) * at(x, top)?),
                    &breaks,
                    axes.len() - d,
                )?;
                Ok(v / factorial(top))
            }
            4 => Ok(0.5 * (at(n, 0)? + at(0.0, 0)?)),
            b => Err(Error::invalid(format!("pattern entry {b} outside 1..=4"))),
        }
    }

    /// Outer integrals see the rounding noise of the inner ones, so their
    /// tolerance is two decades looser per remaining level.
    fn integrate(&self, f: impl Fn(f64) -> Result<f64>, breaks: &[f64], levels: usize) -> Result<f64> {
        let err: RefCell<Option<Error>> = RefCell::new(None);
        let loosen = 100f64.powi(levels as i32 - 1);
        let q = Quadrature::new(1e-14 * loosen, 1e-13 * loosen).with_max_intervals(20_000);
        let v = q.integrate_with_breaks(
            |x| match f(x) {
                Ok(v) => v,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            breaks,
        );
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        Ok(v?.value)
    }
}

fn check_pattern(pattern: &[u8]) -> Result<()> {
    if pattern.iter().any(|&b| !(1..=4).contains(&b)) {
        return Err(Error::invalid("pattern entries must lie in 1..=4"));
    }
    Ok(())
}

/// Value of `P_{β_1,1} ∘ ⋯ ∘ P_{β_r,r} (ω(n,x) + z²)^{-α}` with `r = β.len()`
/// free axes, applying the axes in the order given by `axes` (a permutation
/// of `0..r`). `n` may be fractional for patterns built from 1 and 4 only.
pub fn pattern_value_ordered(
    n: f64,
    z: f64,
    alpha: u32,
    order: u32,
    pattern: &[u8],
    axes: &[usize],
) -> Result<f64> {
    check_pattern(pattern)?;
    let mut sorted = axes.to_vec();
    sorted.sort_unstable();
    if sorted != (0..pattern.len()).collect::<Vec<_>>() {
        return Err(Error::invalid("axis order must be a permutation"));
    }
    if !(n > 0.0 && z > 0.0) {
        return Err(Error::invalid("n and z must be positive"));
    }
    let ctx = Context::new(n, z, alpha, order, pattern.len() as u32)?;
    ctx.apply(pattern, axes, 0, &[(1.0, alpha)], 0.0)
}

pub fn pattern_value(n: f64, z: f64, alpha: u32, order: u32, pattern: &[u8]) -> Result<f64> {
    let axes: Vec<usize> = (0..pattern.len()).collect();
    pattern_value_ordered(n, z, alpha, order, pattern, &axes)
}

/// All patterns in `{1,2,3,4}^r`, lexicographic.
pub fn all_patterns(r: u32) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|p| {
                (1..=4u8).map(move |b| {
                    let mut q = p.clone();
                    q.push(b);
                    q
                })
            })
            .collect();
    }
    out
}

/// Per-pattern values and their total against the direct lattice sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmDecomposition {
    pub m: u32,
    pub n: u32,
    pub z: f64,
    pub alpha: u32,
    pub order: u32,
    pub patterns: Vec<(Vec<u8>, f64)>,
    pub total: f64,
    /// `S(z,n) = Σ_{x∈{0..n}^m} (ω + z²)^{-α}`.
    pub direct: f64,
    pub abs_diff: f64,
}

/// Decomposes `S(z, n)` over all `4^m` patterns.
pub fn em_decompose_md(t: &DiscreteTorus, z: f64, alpha: u32, order: u32) -> Result<EmDecomposition> {
    let m = t.m();
    if m > MAX_DECOMPOSITION_DIM {
        return Err(Error::invalid(format!(
            "full decomposition supports m ≤ {MAX_DECOMPOSITION_DIM}"
        )));
    }
    if 2 * order < 3 * m + 1 {
        return Err(Error::invalid(format!(
            "truncation order {order} below (3m+1)/2 for m = {m}"
        )));
    }
    if alpha == 0 || !(z > 0.0) {
        return Err(Error::invalid("need alpha ≥ 1 and z > 0"));
    }
    let n = t.n();
    let patterns = all_patterns(m);
    let values = patterns
        .par_iter()
        .map(|p| pattern_value(f64::from(n), z, alpha, order, p))
        .collect::<Result<Vec<f64>>>()?;
    let total = crate::numerics::compensated_sum(values.iter().copied());
    let direct = extended_grid_sum(n, m, z, alpha);
    Ok(EmDecomposition {
        m,
        n,
        z,
        alpha,
        order,
        patterns: patterns.into_iter().zip(values).collect(),
        total,
        direct,
        abs_diff: (total - direct).abs(),
    })
}

/// Empirical constants `C_{kℓ}` of the sine-factor bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineFactorReport {
    pub k: u32,
    pub l: u32,
    /// `n` branch when `k ≥ 2(ℓ+1)`, else the `x` branch.
    pub n_branch: bool,
    /// `(n, max |H_{k,ℓ}| / bound over the x grid)`.
    pub ratios: Vec<(u32, f64)>,
    pub max_ratio: f64,
    /// Largest ratio over the first one.
    pub growth: f64,
    pub bounded: bool,
}

/// `|H_{k,ℓ}(∂f)| ≤ C n^{2(ℓ+1)-k}` (if `k ≥ 2(ℓ+1)`) or `C x^{2(ℓ+1)-k}`,
/// sampled on `x ∈ {1/4, 1/2, 1, 2, 4} ∪ {n/8, n/4, 3n/8, n/2}` for each `n`.
pub fn sine_factor_bound_check(k: u32, l: u32, ns: &[u32], alpha: f64) -> Result<SineFactorReport> {
    if k.is_multiple_of(2) || l >= k {
        return Err(Error::invalid("need k odd and ℓ < k"));
    }
    if ns.is_empty() {
        return Err(Error::invalid("empty n grid"));
    }
    let table = HTable::new(alpha, k);
    let poly = table.poly(k, l).expect("in range");
    let p = 2 * (l as i32 + 1) - k as i32;
    let n_branch = p <= 0;
    let mut ratios = Vec::with_capacity(ns.len());
    for &n in ns {
        let nf = f64::from(n);
        let mut worst: f64 = 0.0;
        let xs = [0.25, 0.5, 1.0, 2.0, 4.0, nf / 8.0, nf / 4.0, 3.0 * nf / 8.0, nf / 2.0];
        for &x in xs.iter().filter(|&&x| x <= nf / 2.0) {
            let h = poly.eval(&g_derivatives(nf, x, k)).abs();
            let bound = if n_branch { nf.powi(p) } else { x.powi(p) };
            worst = worst.max(h / bound);
        }
        ratios.push((n, worst));
    }
    let first = ratios[0].1;
    let max_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let growth = if first > 0.0 { max_ratio / first } else { f64::INFINITY };
    Ok(SineFactorReport {
        k,
        l,
        n_branch,
        ratios,
        max_ratio,
        growth,
        bounded: max_ratio.is_finite() && growth <= 2.0,
    })
}

/// Inclusion–exclusion of the order `-2m` terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub m: u32,
    /// `Σ_k (-1)^k C(m,k)`.
    pub binomial_sum: i64,
    /// `(z, |Σ_k (-1)^k C(m,k) P_{4,…,4}| · z^{2m})`.
    pub residuals: Vec<(f64, f64)>,
    pub max_residual: f64,
}

fn binomial(m: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * i64::from(m - i) / i64::from(i + 1))
}

/// `h_{-2m} = 0`: the all-endpoint patterns of every inclusion–exclusion
/// level are `z^{-2m}` and cancel with alternating binomial weights.
pub fn h_minus_2m_cancellation(m: u32, zs: &[f64], n: u32) -> Result<CancellationReport> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let binomial_sum = (0..=m)
        .map(|k| if k % 2 == 0 { binomial(m, k) } else { -binomial(m, k) })
        .sum();
    let mut residuals = Vec::with_capacity(zs.len());
    for &z in zs {
        let mut s = 0.0;
        for k in 0..=m {
            let free = (m - k) as usize;
            let v = pattern_value(f64::from(n), z, m, 1, &vec![4u8; free])?;
            let w = binomial(m, k) as f64;
            s += if k % 2 == 0 { w * v } else { -w * v };
        }
        residuals.push((z, s.abs() * z.powi(2 * m as i32)));
    }
    let max_residual = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(CancellationReport {
        m,
        binomial_sum,
        residuals,
        max_residual,
    })
}

/// Homogeneous terms of `Tr(Δ_n + z²)^{-m}` keyed by their joint order.
///
/// Level `k` of the inclusion–exclusion has `m - k` free axes and exponent
/// `α = m`; its patterns with entries in `{1, 4}` and `q` integrals are
/// homogeneous of order `q - 2m`.
pub fn homogeneous_terms(m: u32, n: f64, z: f64) -> Result<BTreeMap<i32, f64>> {
    let mut out: BTreeMap<i32, f64> = BTreeMap::new();
    for k in 0..=m {
        let free = m - k;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * binomial(m, k) as f64;
        for p in all_patterns(free) {
            if p.iter().any(|&b| b == 2 || b == 3) {
                continue;
            }
            let q = p.iter().filter(|&&b| b == 1).count() as i32;
            let v = pattern_value(n, z, m, default_order(m), &p)?;
            *out.entry(q - 2 * m as i32).or_insert(0.0) += w * v;
        }
    }
    Ok(out)
}

/// One `(z, n)` sample of the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderSample {
    pub z: f64,
    pub n: u32,
    /// `H(z,n) = Tr - Σ h`.
    pub remainder: f64,
    /// `Σ` of the patterns containing β = 3, assembled the same way.
    pub remainder_direct: f64,
    /// `|H| · z^{2m+2}`.
    pub scaled: f64,
    /// Rounding floor of `Tr - Σ h`, scaled like `scaled`.
    pub noise_floor: f64,
}

/// Uniformity in `n` of the remainder bound `H = O(z^{-2m-2})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderReport {
    pub m: u32,
    pub order: u32,
    pub samples: Vec<RemainderSample>,
    /// `(z, sup_n |H| z^{2m+2}, value at the first n)`.
    pub sup_by_z: Vec<(f64, f64, f64)>,
    /// Each sup within 2× of `max(value at the first n, noise floor)`.
    pub uniform_in_n: bool,
    /// `|H|` drops by at least `2^{2m+1}` per doubling of `z ≥ 8`, or is
    /// already below the noise floor.
    pub decays_in_z: bool,
}

pub fn remainder_uniformity_check(m: u32, order: u32, zs: &[f64], ns: &[u32]) -> Result<RemainderReport> {
    if m == 0 || m > MAX_DECOMPOSITION_DIM {
        return Err(Error::invalid(format!("remainder check supports 1 ≤ m ≤ {MAX_DECOMPOSITION_DIM}")));
    }
    if zs.is_empty() || ns.is_empty() {
        return Err(Error::invalid("empty z or n grid"));
    }
    let scale_pow = 2 * m as i32 + 2;
    let jobs: Vec<(f64, u32)> = zs.iter().flat_map(|&z| ns.iter().map(move |&n| (z, n))).collect();
    let samples = jobs
        .par_iter()
        .map(|&(z, n)| {
            let t = DiscreteTorus::new(m, n)?;
            let tr = resolvent_trace(&t, z, m)?;
            let h: f64 = homogeneous_terms(m, f64::from(n), z)?.values().sum();
            let remainder = tr - h;
            let mut direct = 0.0;
            for k in 0..=m {
                let free = m - k;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let w = sign * binomial(m, k) as f64;
                for p in all_patterns(free) {
                    if p.contains(&3) && !p.contains(&2) {
                        direct += w * pattern_value(f64::from(n), z, m, order, &p)?;
                    }
                }
            }
            let zs = z.powi(scale_pow);
            Ok(RemainderSample {
                z,
                n,
                remainder,
                remainder_direct: direct,
                scaled: remainder.abs() * zs,
                noise_floor: 64.0 * f64::EPSILON * tr.abs() * zs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sup_by_z = Vec::new();
    let mut uniform_in_n = true;
    for &z in zs {
        let row: Vec<&RemainderSample> = samples.iter().filter(|s| s.z == z).collect();
        let sup = row.iter().map(|s| s.scaled).fold(0.0, f64::max);
        let floor = row.iter().map(|s| s.noise_floor).fold(0.0, f64::max);
        let first = row[0].scaled;
        uniform_in_n &= sup.is_finite() && sup <= 2.0 * first.max(floor);
        sup_by_z.push((z, sup, first));
    }
    let mut decays_in_z = true;
    for &n in ns {
        let row: Vec<&RemainderSample> = samples.iter().filter(|s| s.n == n).collect();
        for w in row.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.z >= 8.0 && (b.z / a.z - 2.0).abs() < 1e-12 {
                let floor_b = b.noise_floor / b.z.powi(scale_pow);
                let drop_ok = b.remainder.abs() <= a.remainder.abs() / 2f64.powi(2 * m as i32 + 1);
                decays_in_z &= drop_ok || b.remainder.abs() <= floor_b;
            }
        }
    }
    Ok(RemainderReport {
        m,
        order,
        samples,
        sup_by_z,
        uniform_in_n,
        decays_in_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_axis_examples() {
        let one = |k: u32, _x: f64| if k == 0 { 1.0 } else { 0.0 };
        let p = em_sum_1d(&one, 5, 1).unwrap();
        assert!((p.integral - 5.0).abs() < 1e-14);
        assert_eq!((p.derivative_boundary, p.endpoint_average, p.remainder), (0.0, 1.0, 0.0));
        let sq = |k: u32, x: f64| match k {
            0 => x * x,
            1 => 2.0 * x,
            2 => 2.0,
            _ => 0.0,
        };
        let p = em_sum_1d(&sq, 10, 1).unwrap();
        assert_eq!(p.remainder, 0.0);
        assert!((p.total() - 385.0).abs() < 1e-12 * 385.0);
        let lin = |k: u32, x: f64| match k {
            0 => x,
            1 => 1.0,
            _ => 0.0,
        };
        assert!((em_sum_1d(&lin, 7, 1).unwrap().total() - 28.0).abs() < 1e-12);
    }

    #[test]
    fn polynomial_exactness() {
        // u = x^6 - 3x^3 + 2, degree 6 = 2M for M = 3
        let u = |k: u32, x: f64| -> f64 {
            let c: [(f64, i32); 3] = [(1.0, 6), (-3.0, 3), (2.0, 0)];
            c.iter()
                .map(|&(a, p)| {
                    if k as i32 > p {
                        0.0
                    } else {
                        let f: f64 = ((p - k as i32 + 1)..=p).map(f64::from).product();
                        a * f * x.powi(p - k as i32)
                    }
                })
                .sum()
        };
        let n = 9u32;
        let direct: f64 = (0..=n).map(|x| u(0, f64::from(x))).sum();
        let p = em_sum_1d(&u, n, 3).unwrap();
        assert_eq!(p.remainder, 0.0);
        assert!((p.total() - direct).abs() <= 1e-12 * direct.abs());
    }

    #[test]
    fn one_dimensional_decomposition() {
        let t = DiscreteTorus::new(1, 8).unwrap();
        let d = em_decompose_md(&t, 1.0, 1, 3).unwrap();
        assert!(d.abs_diff < 1e-8, "{d:?}");
        assert_eq!(d.patterns[1].1, 0.0);
        assert!((d.patterns[3].1 - 1.0).abs() < 1e-15);
        assert!(em_decompose_md(&t, 1.0, 1, 1).is_err());
    }

    #[test]
    fn two_dimensional_patterns() {
        let t = DiscreteTorus::new(2, 6).unwrap();
        let d = em_decompose_md(&t, 1.0, 2, 4).unwrap();
        assert!(d.abs_diff < 1e-8, "{}", d.abs_diff);
        for (p, v) in &d.patterns {
            if p.contains(&2) {
                assert_eq!(*v, 0.0, "{p:?}");
            }
        }
        let all4 = d.patterns.iter().find(|(p, _)| p == &vec![4, 4]).unwrap().1;
        assert!((all4 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn operators_commute() {
        for pattern in [[1u8, 3u8], [3, 4], [1, 4]] {
            let a = pattern_value_ordered(6.0, 0.7, 2, 4, &pattern, &[0, 1]).unwrap();
            let b = pattern_value_ordered(6.0, 0.7, 2, 4, &pattern, &[1, 0]).unwrap();
            assert!((a - b).abs() <= 1e-11 * a.abs().max(1e-12), "{pattern:?}: {a} vs {b}");
        }
    }

    #[test]
    fn integral_term_is_homogeneous() {
        for m in 1..=2usize {
            let p = vec![1u8; m];
            let ord = m as i32 - 2 * m as i32;
            let (z, n, t) = (0.8, 5.0, 2.5);
            let a = pattern_value(n, z, m as u32, 2, &p).unwrap();
            let b = pattern_value(t * n, t * z, m as u32, 2, &p).unwrap();
            assert!((b - t.powi(ord) * a).abs() <= 1e-10 * b.abs());
        }
    }

    #[test]
    fn cancellation() {
        for m in 1..=3 {
            let r = h_minus_2m_cancellation(m, &[0.5, 1.0, 2.0], 8).unwrap();
            assert_eq!(r.binomial_sum, 0);
            assert!(r.max_residual <= 1e-14);
        }
    }

    #[test]
    fn sine_factor_constants_are_bounded() {
        let ns = [8, 16, 32, 64, 128, 256];
        for (k, l) in [(3, 0), (3, 1), (5, 1), (1, 0)] {
            let r = sine_factor_bound_check(k, l, &ns, 1.0).unwrap();
            assert!(r.bounded, "{r:?}");
        }
        assert!(sine_factor_bound_check(2, 0, &ns, 1.0).is_err());
    }
}
