use std::f64::consts::PI;

use proptest::prelude::*;
use regdet::discrete::{
    resolvent_trace, resolvent_trace_unfolded, spectrum_1d, trace_inclusion_exclusion, DiscreteTorus,
};
use regdet::euler_maclaurin::{bernoulli_polynomial, default_order, em_decompose_md, pattern_value_ordered};
use regdet::smooth::{resolvent_trace_continuum, theta_function, zeta_at_zero};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn dual_path_trace_equality() {
    for m in 1..=2 {
        for n in [2u32, 3, 8, 17, 32] {
            for z in [0.5, 1.0, 2.0] {
                let t = DiscreteTorus::new(m, n).unwrap();
                let direct = resolvent_trace(&t, z, m).unwrap();
                let ie = trace_inclusion_exclusion(&t, z, m).unwrap();
                assert!(rel(ie, direct) <= 1e-12, "m={m} n={n} z={z}");
                let unfolded = resolvent_trace_unfolded(&t, z, m).unwrap();
                assert!(rel(unfolded, direct) <= 1e-13);
            }
        }
    }
}

#[test]
fn faulhaber_sums_from_bernoulli_polynomials() {
    // Σ_{k<N} k^p = (B_{p+1}(N) - B_{p+1}(0)) / (p+1)
    for p in 0..=10usize {
        let b = bernoulli_polynomial(p + 1).unwrap();
        let eval = |x: f64| b.iter().rev().fold(0.0, |acc, c| acc * x + c);
        for n in [1u32, 4, 9] {
            let direct: f64 = (0..n).map(|k| f64::from(k).powi(p as i32)).sum();
            let via = (eval(f64::from(n)) - eval(0.0)) / (p as f64 + 1.0);
            assert!((via - direct).abs() <= 1e-9 * direct.abs().max(1.0), "p={p} n={n}");
        }
    }
}

#[test]
fn zeta_at_zero_is_minus_kernel_dimension() {
    for m in 1..=4 {
        assert!((zeta_at_zero(m).unwrap() + 1.0).abs() < 1e-8, "m={m}");
    }
}

#[test]
fn two_dimensional_traces_converge() {
    let cont = resolvent_trace_continuum(2, 1.0, 2).unwrap();
    let mut last = f64::INFINITY;
    for n in [8u32, 16, 32, 64, 128, 256] {
        let d = resolvent_trace(&DiscreteTorus::new(2, n).unwrap(), 1.0, 2).unwrap();
        let gap = (cont - d).abs();
        assert!(gap < last, "n={n}");
        last = gap;
    }
}

#[test]
fn decomposition_is_stable_in_the_order() {
    // the expansion is asymptotic: high orders at small z lose everything
    // to cancellation in the remainder, so stay at moderate M
    let t = DiscreteTorus::new(1, 12).unwrap();
    let base = em_decompose_md(&t, 1.5, 1, default_order(1)).unwrap();
    for order in [3, 4, 5] {
        let d = em_decompose_md(&t, 1.5, 1, order).unwrap();
        assert!((d.total - base.total).abs() < 1e-10, "M={order}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_is_decreasing_and_above_one(t in 0.05f64..20.0, dt in 0.01f64..1.0, m in 1u32..=4) {
        let a = theta_function(m, t).unwrap();
        let b = theta_function(m, t + dt).unwrap();
        prop_assert!(a > b);
        prop_assert!(b > 1.0);
    }

    #[test]
    fn eigenvalues_grow_with_n(k in 0u32..40, n in 2u32..200, extra in 1u32..200) {
        prop_assume!(n >= 2 * k);
        let np = n + extra;
        let a = spectrum_1d(n)[k as usize];
        let b = spectrum_1d(np)[k as usize];
        prop_assert!(a <= b * (1.0 + 1e-15));
        prop_assert!(b <= f64::from(k * k) * (1.0 + 1e-15));
    }

    #[test]
    fn resolvent_derivative_identity(m in 1u32..=2, n in 2u32..24, z in 0.3f64..3.0, alpha in 1u32..=3) {
        let t = DiscreteTorus::new(m, n).unwrap();
        let h = 1e-4 * z;
        let f = |x: f64| resolvent_trace(&t, x, alpha).unwrap();
        let fd = (f(z - 2.0 * h) - 8.0 * f(z - h) + 8.0 * f(z + h) - f(z + 2.0 * h)) / (12.0 * h);
        let want = -2.0 * f64::from(alpha) * z * resolvent_trace(&t, z, alpha + 1).unwrap();
        prop_assert!(rel(fd, want) < 1e-6);
    }

    #[test]
    fn operators_commute_in_two_axes(
        b1 in 1u8..=4,
        b2 in 1u8..=4,
        z in 0.5f64..2.0,
    ) {
        let p = [b1, b2];
        let a = pattern_value_ordered(5.0, z, 2, 4, &p, &[0, 1]).unwrap();
        let b = pattern_value_ordered(5.0, z, 2, 4, &p, &[1, 0]).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-6));
    }

    #[test]
    fn continuum_trace_large_z(m in 1u32..=3, z in 30.0f64..200.0) {
        let alpha = m / 2 + 1;
        let v = resolvent_trace_continuum(m, z, alpha).unwrap();
        // Σ (|k|²+z²)^{-α} ≈ π^{m/2} Γ(α-m/2)/Γ(α) z^{m-2α} for large z
        let g = |x: f64| statrs::function::gamma::gamma(x);
        let a = f64::from(alpha);
        let h = f64::from(m) / 2.0;
        let lead = PI.powf(h) * g(a - h) / g(a) * z.powf(f64::from(m) - 2.0 * a);
        prop_assert!(rel(v, lead) < 1e-10);
    }
}
