//! Spectral quantities of the discrete torus `T^m_n = (Z/nZ)^m`.
//!
//! The combinatorial Laplacian `Δ_n` has eigenvalues
//! `ω(n,k) = (n²/π²) Σ_i sin²(π k_i / n)`; its graph-Laplacian counterpart
//! `Δ'_n` is scaled by `4π²/n²`. Lattice sums never materialize the `n^m`
//! eigenvalues: they stream products of one-dimensional values, fold the
//! `k ↔ n-k` symmetry into multiplicities, and reduce per-outer-index partial
//! sums in index order.

pub mod exact;
pub mod trees;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Accumulator, Precision};

pub use trees::spanning_tree_count;

/// Largest supported dimension.
pub const MAX_DIM: u32 = 4;
/// Largest lattice (`n^m`) a streamed sum will iterate over.
pub const MAX_LATTICE: u64 = 1 << 36;

/// The discrete torus with `n` points on each of `m` axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteTorus {
    m: u32,
    n: u32,
}

impl DiscreteTorus {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m == 0 || m > MAX_DIM {
            return Err(Error::invalid(format!("dimension m = {m} outside 1..={MAX_DIM}")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("n = {n} must be at least 2")));
        }
        match u64::from(n).checked_pow(m) {
            Some(v) if v <= MAX_LATTICE => {}
            _ => {
                return Err(Error::CapExceeded {
                    what: "lattice size n^m",
                    value: u64::from(n).saturating_pow(m),
                    limit: MAX_LATTICE,
                })
            }
        }
        Ok(DiscreteTorus { m, n })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `n^m`, the number of vertices (and eigenvalues).
    pub fn size(&self) -> u64 {
        u64::from(self.n).pow(self.m)
    }

    /// `n² / π²`, the scale of `Δ_n` relative to `sin²`.
    pub fn scale(&self) -> f64 {
        let n = f64::from(self.n);
        n * n / (PI * PI)
    }
}

/// `(n²/π²) sin²(π k / n)` for `k = 0..n`, symmetric under `k ↔ n-k` bit for bit.
pub fn spectrum_1d(n: u32) -> Vec<f64> {
    let scale = f64::from(n) * f64::from(n) / (PI * PI);
    (0..n)
        .map(|k| {
            let j = k.min(n - k);
            let s = (PI * f64::from(j) / f64::from(n)).sin();
            scale * s * s
        })
        .collect()
}

/// Distinct one-dimensional eigenvalues `k = 0..=n/2` with their multiplicity
/// (1 for `k = 0` and `k = n/2`, 2 otherwise).
fn folded_spectrum(n: u32) -> Vec<(f64, f64)> {
    let scale = f64::from(n) * f64::from(n) / (PI * PI);
    (0..=n / 2)
        .map(|k| {
            let mult = if k == 0 || 2 * k == n { 1.0 } else { 2.0 };
            let s = (PI * f64::from(k) / f64::from(n)).sin();
            (scale * s * s, mult)
        })
        .collect()
}

fn full_spectrum(n: u32) -> Vec<(f64, f64)> {
    spectrum_1d(n).into_iter().map(|v| (v, 1.0)).collect()
}

/// `Σ weight · term(ω)` over the product lattice built from `axis` values.
///
/// Each element of `axis` is `(value, weight)`; lattice points combine by
/// summing values and multiplying weights. With `skip_origin`, the all-zero
/// index is left out. The outermost axis is split across threads and the
/// per-index partial sums are merged in index order.
pub(crate) fn lattice_sum<F>(
    axis: &[(f64, f64)],
    m: u32,
    skip_origin: bool,
    precision: Precision,
    term: F,
) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let len = axis.len();
    let inner_dims = (m - 1) as usize;
    if inner_dims == 0 {
        // one term per task would be all scheduling overhead
        let mut acc = Accumulator::new(precision);
        for (i, &(value, weight)) in axis.iter().enumerate() {
            if !(skip_origin && i == 0) {
                acc.add(weight * term(value));
            }
        }
        return acc.value();
    }
    let partials: Vec<Accumulator> = (0..len)
        .into_par_iter()
        .map(|i0| {
            let mut acc = Accumulator::new(precision);
            let mut idx = vec![0usize; inner_dims];
            loop {
                let mut value = axis[i0].0;
                let mut weight = axis[i0].1;
                for &i in &idx {
                    value += axis[i].0;
                    weight *= axis[i].1;
                }
                let origin = i0 == 0 && idx.iter().all(|&i| i == 0);
                if !(skip_origin && origin) {
                    acc.add(weight * term(value));
                }
                // odometer over the inner axes, last axis fastest
                let mut d = inner_dims;
                loop {
                    if d == 0 {
                        return acc;
                    }
                    d -= 1;
                    idx[d] += 1;
                    if idx[d] < len {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        })
        .collect();
    let mut total = Accumulator::new(precision);
    for p in &partials {
        total.merge(p);
    }
    total.value()
}

/// `ω(n, x) = (n²/π²) Σ sin²(π x_i / n)` for real `x_i ∈ [0, n]`.
pub fn omega(t: &DiscreteTorus, x: &[f64]) -> Result<f64> {
    if x.len() != t.m as usize {
        return Err(Error::invalid(format!(
            "point has {} coordinates, torus dimension is {}",
            x.len(),
            t.m
        )));
    }
    let n = f64::from(t.n);
    if x.iter().any(|&xi| !(0.0..=n).contains(&xi)) {
        return Err(Error::invalid("coordinates must lie in [0, n]"));
    }
    Ok(omega_unchecked(n, x))
}

#[inline]
pub(crate) fn omega_unchecked(n: f64, x: &[f64]) -> f64 {
    let scale = n * n / (PI * PI);
    x.iter()
        .map(|&xi| {
            let r = xi.min(n - xi);
            let s = (PI * r / n).sin();
            scale * s * s
        })
        .sum()
}

/// `log det Δ_n`, the sum of `log ω` over nonzero eigenvalues.
pub fn log_det(t: &DiscreteTorus) -> f64 {
    log_det_with(t, Precision::Compensated)
}

pub fn log_det_with(t: &DiscreteTorus, precision: Precision) -> f64 {
    lattice_sum(&folded_spectrum(t.n), t.m, true, precision, f64::ln)
}

/// `log det Δ'_n = log det Δ_n - (n^m - 1) log(n²/4π²)`.
pub fn log_det_rescaled(t: &DiscreteTorus) -> f64 {
    log_det_rescaled_with(t, Precision::Compensated)
}

pub fn log_det_rescaled_with(t: &DiscreteTorus, precision: Precision) -> f64 {
    let n = f64::from(t.n);
    log_det_with(t, precision) - (t.size() as f64 - 1.0) * (n * n / (4.0 * PI * PI)).ln()
}

/// `log det Δ_n` for `m = 1` from the tree count of the cycle:
/// `2 log n + (n-1) log(n²/4π²)`.
pub fn log_det_closed_form_1d(n: u32) -> f64 {
    let n = f64::from(n);
    2.0 * n.ln() + (n - 1.0) * (n * n / (4.0 * PI * PI)).ln()
}

/// `Tr(Δ_n + z²)^{-α}` over the full lattice, kernel included.
pub fn resolvent_trace(t: &DiscreteTorus, z: f64, alpha: u32) -> Result<f64> {
    resolvent_trace_with(t, z, alpha, Precision::Compensated)
}

pub fn resolvent_trace_with(t: &DiscreteTorus, z: f64, alpha: u32, precision: Precision) -> Result<f64> {
    check_trace_args(z, alpha)?;
    let z2 = z * z;
    let a = -(alpha as i32);
    Ok(lattice_sum(&folded_spectrum(t.n), t.m, false, precision, |w| (w + z2).powi(a)))
}

/// The same trace without the symmetry folding (every `k` visited once).
pub fn resolvent_trace_unfolded(t: &DiscreteTorus, z: f64, alpha: u32) -> Result<f64> {
    check_trace_args(z, alpha)?;
    let z2 = z * z;
    let a = -(alpha as i32);
    Ok(lattice_sum(&full_spectrum(t.n), t.m, false, Precision::Compensated, |w| {
        (w + z2).powi(a)
    }))
}

fn check_trace_args(z: f64, alpha: u32) -> Result<()> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::invalid(format!("z = {z} must be positive")));
    }
    if alpha == 0 {
        return Err(Error::invalid("alpha must be at least 1"));
    }
    Ok(())
}

/// `Σ_{x ∈ {0,…,n}^r} (ω(n,x) + z²)^{-α}` on the extended grid with `r` free axes.
pub fn extended_grid_sum(n: u32, r: u32, z: f64, alpha: u32) -> f64 {
    let z2 = z * z;
    let a = -(alpha as i32);
    if r == 0 {
        return z2.powi(a);
    }
    let mut axis = full_spectrum(n);
    axis.push((0.0, 1.0)); // x = n, where sin² vanishes again
    lattice_sum(&axis, r, false, Precision::Compensated, |w| (w + z2).powi(a))
}

/// `Tr(Δ_n + z²)^{-α}` through inclusion–exclusion over the pinned sublattices
/// `{x_J = 0}` of the extended grid `[0, n]^m`.
pub fn trace_inclusion_exclusion(t: &DiscreteTorus, z: f64, alpha: u32) -> Result<f64> {
    check_trace_args(z, alpha)?;
    let m = t.m;
    let mut acc = crate::numerics::NeumaierSum::new();
    // one term per subset J of the axes; pinned axes drop out of ω
    for mask in 0u32..(1 << m) {
        let pinned = mask.count_ones();
        let sign = if pinned % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * extended_grid_sum(t.n, m - pinned, z, alpha));
    }
    Ok(acc.value())
}

/// Samples of `log det Δ_n` over a grid of `n`.
pub fn log_det_series(m: u32, ns: &[u32], rescaled: bool, precision: Precision) -> Result<Vec<(f64, f64)>> {
    ns.iter()
        .map(|&n| {
            let t = DiscreteTorus::new(m, n)?;
            let v = if rescaled {
                log_det_rescaled_with(&t, precision)
            } else {
                log_det_with(&t, precision)
            };
            Ok((f64::from(n), v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_examples() {
        let t = DiscreteTorus::new(1, 2).unwrap();
        assert!((omega(&t, &[1.0]).unwrap() - 4.0 / (PI * PI)).abs() < 1e-15);
        let t = DiscreteTorus::new(2, 4).unwrap();
        assert_eq!(omega(&t, &[0.0, 0.0]).unwrap(), 0.0);
        assert!((omega(&t, &[1.0, 2.0]).unwrap() - 24.0 / (PI * PI)).abs() < 1e-14);
        assert_eq!(omega(&t, &[1.3, 2.9]).unwrap(), omega(&t, &[4.0 - 1.3, 4.0 - 2.9]).unwrap());
        assert!(omega(&t, &[5.0, 0.0]).is_err());
    }

    #[test]
    fn spectrum_is_exactly_symmetric() {
        for n in [2u32, 7, 64, 1001] {
            let s = spectrum_1d(n);
            assert_eq!(s[0], 0.0);
            for k in 1..n as usize {
                assert_eq!(s[k], s[n as usize - k]);
                assert!(s[k] > 0.0);
            }
        }
    }

    #[test]
    fn log_det_examples() {
        let t = DiscreteTorus::new(1, 2).unwrap();
        assert!((log_det(&t) - (4.0 / (PI * PI)).ln()).abs() < 1e-15);
        let t = DiscreteTorus::new(1, 3).unwrap();
        let want = (729.0 / (16.0 * PI.powi(4))).ln();
        assert!((log_det(&t) - want).abs() < 1e-14);
        assert!((log_det_rescaled(&t) - 9f64.ln()).abs() < 1e-14);
        let t = DiscreteTorus::new(1, 2).unwrap();
        assert!((log_det_rescaled(&t) - 4f64.ln()).abs() < 1e-14);
        // {0, 4, 4, 8}: 4·4·8 = 128 = 4 · (32 spanning trees)
        let t = DiscreteTorus::new(2, 2).unwrap();
        assert!((log_det_rescaled(&t) - 128f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn trace_examples() {
        let t = DiscreteTorus::new(1, 2).unwrap();
        let want = 1.0 + 1.0 / (1.0 + 4.0 / (PI * PI));
        assert!((resolvent_trace(&t, 1.0, 1).unwrap() - want).abs() < 1e-15);
        assert!((trace_inclusion_exclusion(&t, 1.0, 1).unwrap() - want).abs() < 1e-15);
        let t = DiscreteTorus::new(1, 4).unwrap();
        let p2 = PI * PI;
        let want = 1.0 + 2.0 / (1.0 + 8.0 / p2) + 1.0 / (1.0 + 16.0 / p2);
        assert!((resolvent_trace(&t, 1.0, 1).unwrap() - want).abs() < 1e-14);
        assert!(resolvent_trace(&t, 0.0, 1).is_err());
        assert!(resolvent_trace(&t, 1.0, 0).is_err());
    }

    #[test]
    fn large_z_counts_vertices() {
        let t = DiscreteTorus::new(2, 5).unwrap();
        let z: f64 = 1e4;
        let v = resolvent_trace(&t, z, 2).unwrap() * z.powi(4);
        assert!((v - 25.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_oversized_tori() {
        assert!(matches!(DiscreteTorus::new(4, 1 << 10), Err(Error::CapExceeded { .. })));
        assert!(DiscreteTorus::new(5, 2).is_err());
        assert!(DiscreteTorus::new(1, 1).is_err());
    }
}
