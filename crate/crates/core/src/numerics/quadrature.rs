//! Globally adaptive Gauss–Kronrod quadrature.
//!
//! Each interval is estimated with the 10-point Gauss / 21-point Kronrod pair;
//! the interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |I|)`. Interval contributions are
//! reduced in left-to-right order with compensated summation, so results do
//! not depend on the order in which intervals were refined.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::numerics::summation::NeumaierSum;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Error estimate is already at the rounding floor of the rule.
    at_floor: bool,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One application of the 21-point Kronrod rule with the QUADPACK error heuristic.
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    Segment {
        a,
        b,
        value,
        error: err,
        at_floor: err <= floor,
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Tolerances and limits for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadResult> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrates over `[points[0], points.last()]`, starting from the given
    /// subdivision. Breakpoints should sit where `f` or its derivatives jump.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
        &self,
        f: F,
        points: &[f64],
    ) -> Result<QuadResult> {
        if points.len() < 2 {
            return Err(Error::invalid("quadrature needs at least two points"));
        }
        if points.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::invalid("quadrature breakpoints must be non-decreasing"));
        }
        let (a, b) = (points[0], *points.last().unwrap());
        let mut heap = BinaryHeap::new();
        let mut done = Vec::new();
        let place = |s: Segment, heap: &mut BinaryHeap<Segment>, done: &mut Vec<Segment>| {
            if s.at_floor {
                done.push(s);
            } else {
                heap.push(s);
            }
        };
        for w in points.windows(2) {
            if w[0] < w[1] {
                place(gk21(&f, w[0], w[1]), &mut heap, &mut done);
            }
        }
        loop {
            let (total, err) = totals(heap.iter().chain(done.iter()));
            if !total.is_finite() || !err.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite integrand on [{a}, {b}]"
                )));
            }
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            if err <= target {
                let intervals = heap.len() + done.len();
                return Ok(QuadResult {
                    value: ordered_total(heap.into_iter().chain(done)),
                    error: err,
                    intervals,
                });
            }
            let Some(worst) = heap.pop() else {
                // every interval is at rounding resolution; refining cannot help
                let intervals = done.len();
                return Ok(QuadResult {
                    value: ordered_total(done.into_iter()),
                    error: err,
                    intervals,
                });
            };
            if heap.len() + done.len() + 2 > self.max_intervals {
                return Err(Error::QuadratureNotConverged {
                    a,
                    b,
                    achieved: err,
                    requested: target,
                });
            }
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-15 * (b - a).abs() {
                done.push(worst);
                continue;
            }
            place(gk21(&f, worst.a, mid), &mut heap, &mut done);
            place(gk21(&f, mid, worst.b), &mut heap, &mut done);
        }
    }
}

fn totals<'a>(segs: impl Iterator<Item = &'a Segment>) -> (f64, f64) {
    let mut v = NeumaierSum::new();
    let mut e = 0.0;
    for s in segs {
        v.add(s.value);
        e += s.error;
    }
    (v.value(), e)
}

fn ordered_total(segs: impl Iterator<Item = Segment>) -> f64 {
    let mut all: Vec<Segment> = segs.collect();
    all.sort_by(|x, y| x.a.total_cmp(&y.a));
    all.iter().map(|s| s.value).collect::<NeumaierSum>().value()
}

/// Integrates with the default tolerances.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<QuadResult> {
    Quadrature::default().integrate(f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_rule_is_exact_for_degree_31() {
        // 21-point Kronrod extension of 10-point Gauss integrates degree 3*10+1 exactly
        for deg in [0_i32, 1, 7, 20, 31] {
            let s = gk21(&|x: f64| x.powi(deg), 0.0, 1.0);
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((s.value - exact).abs() < 1e-15, "degree {deg}: {}", s.value);
        }
    }

    #[test]
    fn adaptive_handles_peaks_and_endpoint_singularities() {
        let q = Quadrature::new(1e-14, 1e-13);
        let r = q.integrate(|x| 1.0 / (1.0 + x * x), 0.0, 1000.0).unwrap();
        assert!((r.value - 1000f64.atan()).abs() < 1e-12);
        let r = q.integrate(|x| x.sqrt().ln(), 0.0, 1.0).unwrap();
        assert!((r.value + 0.5).abs() < 1e-11);
    }

    #[test]
    fn breakpoints_split_kinks() {
        let q = Quadrature::new(1e-14, 1e-14);
        let r = q
            .integrate_with_breaks(|x: f64| (x - x.floor() - 0.5).abs(), &[0.0, 1.0, 2.0, 3.0])
            .unwrap();
        assert!((r.value - 0.75).abs() < 1e-14, "{}", r.value);
        let r = q.integrate(|x: f64| x.sin(), 0.0, PI).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn reports_non_convergence() {
        let q = Quadrature::new(1e-15, 0.0).with_max_intervals(8);
        let err = q.integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }
}
