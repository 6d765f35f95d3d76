//! Partial products of the continuum torus eigenvalues `|k|²` and their
//! regularized limits.
//!
//! Lattice points are enumerated by squared radius with integer arithmetic,
//! giving shell multiplicities `r_m(j) = #{k : |k|² = j}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{GeometricGrid, NeumaierSum};
use crate::phg::{self, BasisSpec, FitOptions, FitReport, Samples};
use crate::smooth::log_det_zeta;

/// Largest number of enumeration steps (points in the nonnegative orthant).
pub const MAX_ENUMERATION: u64 = 400_000_000;

/// How the partial product is truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductMode {
    /// The first `N` nonzero eigenvalues in ascending order.
    ByCount,
    /// All eigenvalues with `0 < |k| ≤ Λ`.
    ByCutoff,
}

impl fmt::Display for ProductMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProductMode::ByCount => "by-count",
            ProductMode::ByCutoff => "by-cutoff",
        })
    }
}

impl FromStr for ProductMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "by-count" | "count" => Ok(ProductMode::ByCount),
            "by-cutoff" | "cutoff" => Ok(ProductMode::ByCutoff),
            _ => Err(Error::invalid(format!("unknown product mode '{s}'"))),
        }
    }
}

/// Volume of the unit ball in dimension `m`.
fn unit_ball_volume(m: u32) -> f64 {
    use std::f64::consts::PI;
    let h = f64::from(m) / 2.0;
    PI.powf(h) / statrs::function::gamma::gamma(h + 1.0)
}

/// `r_m(j)` for `j = 0..=max_sq`.
pub fn shell_counts(m: u32, max_sq: u64) -> Result<Vec<u64>> {
    if m == 0 || m > crate::discrete::MAX_DIM {
        return Err(Error::invalid(format!("dimension m = {m} outside 1..=4")));
    }
    let r = (max_sq as f64).sqrt();
    let steps = unit_ball_volume(m) * (r + 1.0).powi(m as i32) / f64::from(1u32 << m);
    if steps > MAX_ENUMERATION as f64 {
        return Err(Error::CapExceeded {
            what: "lattice enumeration",
            value: steps as u64,
            limit: MAX_ENUMERATION,
        });
    }
    let len = usize::try_from(max_sq + 1).map_err(|_| Error::invalid("radius too large"))?;
    let mut counts = vec![0u64; len];
    // nonnegative coordinates, each nonzero one standing for two signs
    fn walk(dims: u32, sq: u64, weight: u64, max_sq: u64, counts: &mut [u64]) {
        if dims == 0 {
            counts[sq as usize] += weight;
            return;
        }
        walk(dims - 1, sq, weight, max_sq, counts);
        let mut x = 1u64;
        while sq + x * x <= max_sq {
            walk(dims - 1, sq + x * x, 2 * weight, max_sq, counts);
            x += 1;
        }
    }
    walk(m, 0, 1, max_sq, &mut counts);
    Ok(counts)
}

/// `⌊Λ²⌋` computed without trusting the float square.
fn floor_square(lambda: f64) -> u64 {
    let mut j = (lambda * lambda).floor() as u64;
    while j > 0 && (j as f64).sqrt() > lambda {
        j -= 1;
    }
    while ((j + 1) as f64).sqrt() <= lambda {
        j += 1;
    }
    j
}

/// Shells of `|k|²` up to a radius, with cumulative counts.
#[derive(Debug, Clone)]
pub struct ShellTable {
    m: u32,
    counts: Vec<u64>,
}

impl ShellTable {
    pub fn new(m: u32, max_sq: u64) -> Result<Self> {
        Ok(ShellTable {
            m,
            counts: shell_counts(m, max_sq)?,
        })
    }

    /// A table holding at least `n` nonzero lattice points.
    pub fn with_count(m: u32, n: u64) -> Result<Self> {
        let v = unit_ball_volume(m);
        let mut max_sq = ((n as f64 / v).powf(2.0 / f64::from(m)) * 1.1 + 4.0).ceil() as u64;
        loop {
            let t = ShellTable::new(m, max_sq)?;
            if t.counts.iter().skip(1).sum::<u64>() >= n {
                return Ok(t);
            }
            max_sq *= 2;
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn max_sq(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of lattice points with `0 < |k| ≤ Λ`.
    pub fn count_within(&self, lambda: f64) -> u64 {
        let top = floor_square(lambda).min(self.max_sq()) as usize;
        self.counts[1..=top].iter().sum()
    }

    /// `Σ_{0<|k|≤Λ} log |k|²`.
    pub fn log_sum_cutoff(&self, lambda: f64) -> Result<f64> {
        let top = floor_square(lambda);
        if top > self.max_sq() {
            return Err(Error::invalid(format!("cutoff {lambda} beyond the enumerated radius")));
        }
        let mut acc = NeumaierSum::new();
        for (j, &c) in self.counts.iter().enumerate().take(top as usize + 1).skip(2) {
            if c > 0 {
                acc.add(c as f64 * (j as f64).ln());
            }
        }
        Ok(acc.value())
    }

    /// Sum of `log λ` over the first `n` nonzero eigenvalues. Within the last
    /// shell the points are taken in lexicographic order; only their number
    /// matters for the sum.
    pub fn log_sum_count(&self, n: u64) -> Result<f64> {
        let mut left = n;
        let mut acc = NeumaierSum::new();
        for (j, &c) in self.counts.iter().enumerate().skip(1) {
            if left == 0 {
                break;
            }
            let take = c.min(left);
            if take > 0 && j > 1 {
                acc.add(take as f64 * (j as f64).ln());
            }
            left -= take;
        }
        if left > 0 {
            return Err(Error::invalid(format!("count {n} beyond the enumerated radius")));
        }
        Ok(acc.value())
    }

    /// Smoothed cutoff sum: `Σ_j c_j · F((log Λ - u_j)/h)` with `u_j = ½ log j`,
    /// `c_j = r_m(j) log j` and `F` the CDF of a sum of `order` uniform
    /// variables on `[-h, h]` (a centered B-spline kernel in `log Λ`).
    pub fn log_sum_smoothed(&self, lambda: f64, s: &Smoothing) -> Result<f64> {
        let q = f64::from(s.order);
        let u = lambda.ln();
        let reach = (u + q * s.half_width).exp();
        if floor_square(reach) > self.max_sq() {
            return Err(Error::invalid(format!(
                "smoothing window at {lambda} reaches beyond the enumerated radius"
            )));
        }
        let full = (u - q * s.half_width).exp();
        let mut acc = NeumaierSum::new();
        acc.add(self.log_sum_cutoff(full)?);
        let lo = floor_square(full) as usize + 1;
        let hi = floor_square(reach) as usize;
        for j in lo.max(2)..=hi {
            let c = self.counts[j];
            if c == 0 {
                continue;
            }
            let lj = (j as f64).ln();
            let x = (u - 0.5 * lj + q * s.half_width) / (2.0 * s.half_width);
            acc.add(c as f64 * lj * irwin_hall_cdf(s.order, x));
        }
        Ok(acc.value())
    }
}

/// CDF of the sum of `q` independent uniforms on `[0, 1]`.
pub fn irwin_hall_cdf(q: u32, y: f64) -> f64 {
    let qf = f64::from(q);
    if y <= 0.0 {
        return 0.0;
    }
    if y >= qf {
        return 1.0;
    }
    let mut s = 0.0;
    let mut binom = 1.0;
    let mut fact = 1.0;
    for i in 1..=q {
        fact *= f64::from(i);
    }
    for i in 0..=q {
        if f64::from(i) > y {
            break;
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binom * (y - f64::from(i)).powi(q as i32);
        binom *= f64::from(q - i) / f64::from(i + 1);
    }
    (s / fact).clamp(0.0, 1.0)
}

/// `Σ log λ` over the first `parameter` nonzero eigenvalues (by count) or
/// over `0 < |k| ≤ parameter` (by cutoff).
pub fn partial_log_product(m: u32, mode: ProductMode, parameter: f64) -> Result<f64> {
    if !(parameter >= 1.0 && parameter.is_finite()) {
        return Err(Error::invalid(format!("parameter must be at least 1, got {parameter}")));
    }
    match mode {
        ProductMode::ByCutoff => ShellTable::new(m, floor_square(parameter))?.log_sum_cutoff(parameter),
        ProductMode::ByCount => {
            if parameter.fract() != 0.0 {
                return Err(Error::invalid("count must be an integer"));
            }
            let n = parameter as u64;
            ShellTable::with_count(m, n)?.log_sum_count(n)
        }
    }
}

/// Log-scale window used for `m ≥ 2` before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Smoothing {
    /// Number of convolved boxes (B-spline order).
    pub order: u32,
    /// Half-width of each box in `log Λ`.
    pub half_width: f64,
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing {
            order: 3,
            half_width: std::f64::consts::SQRT_2.ln(),
        }
    }
}

/// Default fit basis: Stirling-type terms for `m = 1`, Weyl terms for `m ≥ 2`.
pub fn default_basis(m: u32) -> BasisSpec {
    let pairs = if m == 1 {
        vec![(1.0, 1), (1.0, 0), (0.0, 1), (0.0, 0), (-1.0, 0), (-3.0, 0), (-5.0, 0)]
    } else {
        let d = f64::from(m);
        vec![(d, 1), (d, 0), (0.0, 0)]
    };
    BasisSpec::for_reglimit(pairs).expect("valid default basis")
}

/// Default parameter grid per dimension and mode.
pub fn default_grid(m: u32, mode: ProductMode) -> GeometricGrid {
    let r = std::f64::consts::SQRT_2;
    match (m, mode) {
        (1, ProductMode::ByCutoff) => GeometricGrid::new(16.0, 4096.0, r),
        (1, ProductMode::ByCount) => GeometricGrid::new(32.0, 8192.0, r),
        _ => GeometricGrid::new(32.0, 512.0, 2f64.powf(1.0 / 3.0)),
    }
    .expect("valid default grid")
}

/// Result of [`eigenproduct_reglimit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenproductReport {
    pub m: u32,
    pub mode: ProductMode,
    pub constant: f64,
    pub uncertainty: f64,
    /// `log det_ζ Δ`.
    pub reference: f64,
    pub difference: f64,
    pub smoothing: Option<Smoothing>,
    /// `(parameter, partial sum)` as fitted (after smoothing).
    pub samples: Vec<(f64, f64)>,
    pub fit: FitReport,
}

/// Regularized limit of the partial log-products along `grid`.
///
/// For `m = 1` the cutoff is integer-valued, so grid points are rounded (to
/// even integers when counting, so that no `±k` pair is split). For `m ≥ 2`
/// only the cutoff parameterization is supported and the samples are
/// smoothed with `smoothing` (default [`Smoothing::default`]) before fitting.
pub fn eigenproduct_reglimit(
    m: u32,
    mode: ProductMode,
    grid: &GeometricGrid,
    basis: &BasisSpec,
    smoothing: Option<Smoothing>,
) -> Result<EigenproductReport> {
    if m == 0 || m > crate::discrete::MAX_DIM {
        return Err(Error::invalid(format!("dimension m = {m} outside 1..=4")));
    }
    if m >= 2 && mode == ProductMode::ByCount {
        return Err(Error::invalid(
            "count-parameterized products have no polyhomogeneous expansion for m ≥ 2; use by-cutoff",
        ));
    }
    let smoothing = if m >= 2 {
        Some(smoothing.unwrap_or_default())
    } else {
        smoothing
    };
    if let Some(s) = smoothing {
        if s.order == 0 || !(s.half_width > 0.0) {
            return Err(Error::invalid("smoothing needs order ≥ 1 and positive half-width"));
        }
    }
    let points: Vec<f64> = match (m, mode) {
        (1, ProductMode::ByCount) => {
            let mut v: Vec<f64> = grid
                .points()
                .iter()
                .map(|x| 2.0 * (x / 2.0).round().max(1.0))
                .collect();
            v.dedup();
            v
        }
        (1, ProductMode::ByCutoff) if smoothing.is_none() => {
            grid.integer_points().into_iter().map(|x| x.max(1) as f64).collect()
        }
        _ => grid.points(),
    };
    let top = *points.last().ok_or_else(|| Error::invalid("empty grid"))?;
    let samples: Vec<(f64, f64)> = match mode {
        ProductMode::ByCount => {
            let table = ShellTable::with_count(m, top as u64)?;
            points
                .iter()
                .map(|&n| Ok((n, table.log_sum_count(n as u64)?)))
                .collect::<Result<_>>()?
        }
        ProductMode::ByCutoff => {
            let reach = match smoothing {
                Some(s) => top * (f64::from(s.order) * s.half_width).exp(),
                None => top,
            };
            let table = ShellTable::new(m, floor_square(reach) + 1)?;
            points
                .iter()
                .map(|&l| {
                    let v = match &smoothing {
                        Some(s) => table.log_sum_smoothed(l, s)?,
                        None => table.log_sum_cutoff(l)?,
                    };
                    Ok((l, v))
                })
                .collect::<Result<_>>()?
        }
    };
    let s = Samples::new(samples.clone())?;
    let (constant, uncertainty, fit) = phg::extract_reglimit_with(&s, basis, &FitOptions::default())?;
    let reference = log_det_zeta(m)?;
    Ok(EigenproductReport {
        m,
        mode,
        constant,
        uncertainty,
        reference,
        difference: constant - reference,
        smoothing,
        samples,
        fit,
    })
}
