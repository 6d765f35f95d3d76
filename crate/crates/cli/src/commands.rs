//! One function per subcommand. Each returns the result payload, the checks
//! it performed and any series for CSV output.

use std::f64::consts::PI;

use regdet::discrete::exact::rescaled_spectral_product;
use regdet::discrete::{
    self, log_det_closed_form_1d, log_det_rescaled_with, log_det_with, resolvent_trace_with, spanning_tree_count,
    trace_inclusion_exclusion, DiscreteTorus,
};
use regdet::eigenproduct::{self, ProductMode};
use regdet::euler_maclaurin::{self as em, default_order};
use regdet::interchange;
use regdet::numerics::GeometricGrid;
use regdet::phg::{BasisSpec, Direction};
use regdet::pipeline;
use regdet::regint::{logdet_via_regint, LogDetOptions};
use regdet::smooth;
use regdet::{Error, Result};
use serde_json::json;

use crate::config::{parse_or, require, Params};
use crate::report::{Check, Outcome};

fn torus(p: &Params) -> Result<DiscreteTorus> {
    DiscreteTorus::new(p.m.unwrap_or(1), require(p.n, "n")?)
}

fn z_series(p: &Params, f: impl Fn(f64) -> Result<f64>) -> Result<Vec<(f64, f64)>> {
    match &p.z_grid {
        Some(g) => g.parse::<GeometricGrid>()?.points().into_iter().map(|z| Ok((z, f(z)?))).collect(),
        None => Ok(Vec::new()),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b.abs().max(f64::MIN_POSITIVE)).abs()
}

pub fn spectrum(p: &Params) -> Result<Outcome> {
    let t = torus(p)?;
    let s = discrete::spectrum_1d(t.n());
    let largest = s.iter().copied().fold(0.0, f64::max);
    let series = s.iter().enumerate().map(|(k, v)| (k as f64, *v)).collect();
    Outcome::new(
        format!("m={} n={}: {} eigenvalues, largest {largest:.6}", t.m(), t.n(), t.size()),
        json!({ "m": t.m(), "n": t.n(), "size": t.size(), "spectrum_1d": s, "largest": largest }),
    )
    .map(|o| o.series("spectrum", "k", series))
}

pub fn logdet(p: &Params) -> Result<Outcome> {
    let m = p.m.unwrap_or(1);
    let precision = p.precision()?;
    let rescaled = p.rescaled.unwrap_or(false);
    if let Some(g) = &p.n_grid {
        let grid: GeometricGrid = g.parse()?;
        let ns: Vec<u32> = grid.integer_points().into_iter().filter(|&n| n >= 2).map(|n| n as u32).collect();
        let series = discrete::log_det_series(m, &ns, rescaled, precision)?;
        let mut o = Outcome::new(
            format!("m={m}: {} samples over {g}", series.len()),
            json!({ "m": m, "rescaled": rescaled, "samples": series }),
        )?;
        if m == 1 && !rescaled {
            let worst = series
                .iter()
                .map(|&(n, v)| rel(v, log_det_closed_form_1d(n as u32)))
                .fold(0.0, f64::max);
            o = o.check(Check::new("max relative error against 2 log n + (n-1) log(n²/4π²)", Some(1), worst, 0.0, 1e-10));
        }
        return Ok(o.series("logdet", "n", series));
    }
    let t = torus(p)?;
    let v = log_det_with(&t, precision);
    let vr = log_det_rescaled_with(&t, precision);
    let mut o = Outcome::new(
        format!("log det Δ_n = {v:.6}, rescaled {vr:.6}"),
        json!({ "m": t.m(), "n": t.n(), "log_det": v, "log_det_rescaled": vr }),
    )?;
    if t.m() == 1 {
        o = o.check(Check::new(
            "relative error against 2 log n + (n-1) log(n²/4π²)",
            Some(1),
            rel(v, log_det_closed_form_1d(t.n())),
            0.0,
            1e-10,
        ));
    }
    Ok(o)
}

pub fn trace(p: &Params) -> Result<Outcome> {
    let t = torus(p)?;
    let z = require(p.z, "z")?;
    let alpha = p.alpha.unwrap_or(t.m());
    let precision = p.precision()?;
    let v = resolvent_trace_with(&t, z, alpha, precision)?;
    let unfolded = discrete::resolvent_trace_unfolded(&t, z, alpha)?;
    let mut o = Outcome::new(
        format!("Tr(Δ_n + z²)^-{alpha} = {v:.12}"),
        json!({ "m": t.m(), "n": t.n(), "z": z, "alpha": alpha, "trace": v, "unfolded": unfolded }),
    )?
    .check(Check::new("folded vs unfolded (relative)", None, rel(v, unfolded), 0.0, 1e-13));
    if alpha == t.m() {
        let ie = trace_inclusion_exclusion(&t, z, alpha)?;
        o = o.check(Check::new("inclusion-exclusion vs direct (relative)", None, rel(ie, v), 0.0, 1e-12));
    }
    let series = z_series(p, |z| resolvent_trace_with(&t, z, alpha, precision))?;
    Ok(o.series("trace", "z", series))
}

pub fn trees(p: &Params) -> Result<Outcome> {
    let t = torus(p)?;
    let count = spanning_tree_count(&t)?;
    let product = rescaled_spectral_product(&t)?;
    let want = num_bigint::BigUint::from(t.n()).pow(t.m()) * &count;
    let ok = product.value == want;
    Outcome::new(
        format!("m={} n={}: {} spanning trees ({} bits)", t.m(), t.n(), count, count.bits()),
        json!({
            "m": t.m(),
            "n": t.n(),
            "spanning_trees": count.to_string(),
            "rescaled_spectral_product": product.value.to_string(),
            "rounding_distance": product.distance,
        }),
    )
    .map(|o| o.check(Check::holds("rescaled spectral product equals n^m · trees", Some(13), ok)))
}

pub fn regint(p: &Params) -> Result<Outcome> {
    let opts = LogDetOptions::default();
    if let Some(lambda) = p.lambda {
        if !(lambda > 0.0) {
            return Err(Error::InvalidInput("--lambda must be positive".into()));
        }
        let m = p.m.unwrap_or(1);
        let trace = move |z: f64| (lambda + z * z).powi(-(m as i32));
        let r = logdet_via_regint(&trace, m, 0, &opts)?;
        let tol = p.tol.unwrap_or(1e-8);
        return Ok(Outcome::new(format!("-2⨍ z^{}/(λ+z²)^{m} dz = {:.12}", 2 * m - 1, r.value), r)?
            .check(Check::new("log λ", Some(5), r.value, lambda.ln(), tol)));
    }
    let t = DiscreteTorus::new(p.m.unwrap_or(1), p.n.unwrap_or(8))?;
    let precision = p.precision()?;
    let trace = |z: f64| resolvent_trace_with(&t, z, t.m(), precision).unwrap_or(f64::NAN);
    let r = logdet_via_regint(&trace, t.m(), 1, &opts)?;
    let direct = log_det_with(&t, precision);
    let tol = p.tol.unwrap_or(1e-6);
    Ok(Outcome::new(format!("regularized-integral route {:.10}, direct {direct:.10}", r.value), r)?
        .check(Check::new("direct log det", Some(6), r.value, direct, tol)))
}

pub fn interchange_check(p: &Params) -> Result<Outcome> {
    let tol = p.tol.unwrap_or(1e-6);
    let fns = match (&p.name, p.all.unwrap_or(false)) {
        (Some(name), false) => vec![interchange::registry_entry(name)
            .ok_or_else(|| Error::InvalidInput(format!("no registry entry named '{name}'")))?],
        _ => interchange::registry(),
    };
    let reports = fns
        .iter()
        .map(|f| interchange::check_interchange(f, tol))
        .collect::<Result<Vec<_>>>()?;
    let passed = reports.iter().filter(|r| r.pass).count();
    let checks: Vec<Check> = reports
        .iter()
        .map(|r| Check::new(format!("{}: lhs vs rhs", r.name), Some(8), r.lhs, r.rhs, tol))
        .collect();
    let mut o = Outcome::new(format!("{passed}/{} registry functions pass", reports.len()), &reports)?;
    o.checks = checks;
    Ok(o)
}

fn parse_pattern(s: &str) -> Result<Vec<u8>> {
    s.split(',')
        .map(|b| {
            b.trim()
                .parse::<u8>()
                .map_err(|_| Error::InvalidInput(format!("pattern entry '{b}' is not an integer")))
        })
        .collect()
}

pub fn em_check(p: &Params) -> Result<Outcome> {
    let t = torus(p)?;
    let m = t.m();
    let z = p.z.unwrap_or(1.0);
    let alpha = p.alpha.unwrap_or(m);
    let order = p.order.unwrap_or(default_order(m));
    if let Some(s) = &p.pattern {
        let pattern = parse_pattern(s)?;
        if pattern.len() != m as usize {
            return Err(Error::InvalidInput(format!("pattern has {} entries for m = {m}", pattern.len())));
        }
        let v = em::pattern_value(f64::from(t.n()), z, alpha, order, &pattern)?;
        let mut o = Outcome::new(
            format!("pattern {pattern:?}: {v:e}"),
            json!({ "m": m, "n": t.n(), "z": z, "alpha": alpha, "M": order, "pattern": pattern, "value": v }),
        )?;
        if pattern.contains(&2) {
            o = o.check(Check::new("patterns containing 2 vanish", Some(10), v, 0.0, 0.0));
        }
        return Ok(o);
    }
    let d = em::em_decompose_md(&t, z, alpha, order)?;
    let tol = p.tol.unwrap_or(1e-8);
    let zero = d.patterns.iter().filter(|(b, _)| b.contains(&2)).all(|(_, v)| *v == 0.0);
    let all4 = d
        .patterns
        .iter()
        .find(|(b, _)| b.iter().all(|&x| x == 4))
        .map(|(_, v)| *v)
        .unwrap_or(f64::NAN);
    let cancel = em::h_minus_2m_cancellation(m, &[z], t.n())?;
    let summary = format!("{} patterns, total {:.12}, direct {:.12}", d.patterns.len(), d.total, d.direct);
    let (total, direct) = (d.total, d.direct);
    Ok(Outcome::new(summary, json!({ "decomposition": d, "cancellation": cancel }))?
        .check(Check::new("pattern total vs direct lattice sum", Some(9), total, direct, tol))
        .check(Check::holds("patterns containing 2 are exactly zero", Some(10), zero))
        .check(Check::new("all-endpoint pattern", None, all4, z.powi(-2 * alpha as i32), 1e-14 * z.powi(-2 * alpha as i32)))
        .check(Check::new("order -2m cancellation residual · z^2m", Some(10), cancel.max_residual, 0.0, 1e-14)))
}

pub fn zeta_det(p: &Params) -> Result<Outcome> {
    let m = p.m.unwrap_or(1);
    let v = smooth::log_det_zeta(m)?;
    let z0 = smooth::zeta_at_zero(m)?;
    let mut result = json!({ "m": m, "log_det_zeta": v, "zeta_at_zero": z0 });
    let mut checks = vec![Check::new("ζ(0) = -dim ker", None, z0, -1.0, 1e-8)];
    match m {
        1 => checks.push(Check::new("2 log 2π", None, v, 2.0 * (2.0 * PI).ln(), 1e-10)),
        2 => checks.push(Check::new("log(Γ(1/4)⁴/4π)", None, v, smooth::log_det_zeta_closed_form_2d(), 1e-10)),
        _ => {}
    }
    if m <= 2 {
        let r = smooth::logdet_zeta_via_regint(m)?;
        let tol = p.tol.unwrap_or(if m == 1 { 1e-4 } else { 5e-3 });
        checks.push(Check::new("regularized-integral route vs theta route", Some(7), r.value, v, tol));
        result["via_regint"] = serde_json::to_value(r).map_err(|e| Error::Numerical(e.to_string()))?;
    }
    let mut o = Outcome::new(format!("log det_ζ Δ (m={m}) = {v:.10}"), result)?;
    o.checks = checks;
    Ok(o)
}

pub fn trace_continuum(p: &Params) -> Result<Outcome> {
    let m = p.m.unwrap_or(1);
    let alpha = p.alpha.unwrap_or(m / 2 + 1);
    let z = require(p.z, "z")?;
    let v = smooth::resolvent_trace_continuum(m, z, alpha)?;
    let mut o = Outcome::new(
        format!("Tr(Δ + z²)^-{alpha} = {v:.12}"),
        json!({ "m": m, "z": z, "alpha": alpha, "trace": v }),
    )?;
    if m == 1 && alpha == 1 {
        let closed = PI / (PI * z).tanh() / z;
        o = o.check(Check::new("π coth(πz)/z (relative)", None, rel(v, closed), 0.0, 1e-12));
    }
    let series = z_series(p, |z| smooth::resolvent_trace_continuum(m, z, alpha))?;
    Ok(o.series("trace-continuum", "z", series))
}

pub fn converge(p: &Params) -> Result<Outcome> {
    let m = p.m.unwrap_or(1);
    let grid = parse_or(&p.n_grid, || GeometricGrid::new(8.0, 1024.0, 2.0).expect("valid grid"))?;
    let ns: Vec<u32> = grid.integer_points().into_iter().map(|n| n as u32).collect();
    let z = p.z.unwrap_or(1.0);
    let alpha = p.alpha.unwrap_or(m);
    let tol = p.tol.unwrap_or(1e-5);
    let r = smooth::convergence_check(m, &ns, z, alpha, tol)?;
    let criterion = (m == 1 && alpha == 1 && z == 1.0).then_some(11);
    let series = r.rows.iter().map(|row| (f64::from(row.n), row.difference)).collect();
    let deriv = r.derivative_residual_continuum.max(r.derivative_residual_discrete);
    Ok(Outcome::new(
        format!("|difference| at n={} is {:.4e}", ns.last().copied().unwrap_or(0), r.final_abs_difference),
        &r,
    )?
    .check(Check::holds("|difference| strictly decreasing", criterion, r.strictly_decreasing))
    .check(Check::new("final |difference|", criterion, r.final_abs_difference, 0.0, tol))
    .check(Check::new("derivative identity residual", criterion, deriv, 0.0, r.derivative_tolerance))
    .series("converge", "n", series))
}

pub fn eigenproduct(p: &Params) -> Result<Outcome> {
    let m = p.m.unwrap_or(1);
    let mode = parse_or(&p.mode, || ProductMode::ByCutoff)?;
    let grid = parse_or(&p.n_grid, || eigenproduct::default_grid(m, mode))?;
    let basis = parse_or(&p.basis, || eigenproduct::default_basis(m))?;
    let r = eigenproduct::eigenproduct_reglimit(m, mode, &grid, &basis, None)?;
    let (reference, name) = match (m, mode) {
        (1, ProductMode::ByCount) => (2.0 * PI.ln(), "2 log π (count parameterization)"),
        _ => (r.reference, "log det_ζ Δ"),
    };
    let tol = p.tol.unwrap_or(if m == 1 { 1e-6 } else { 5e-2 });
    let samples = r.samples.clone();
    Ok(Outcome::new(format!("constant {:.9} ± {:.1e}, reference {reference:.9}", r.constant, r.uncertainty), &r)?
        .check(Check::new(name, Some(12), r.constant, reference, tol))
        .series("eigenproduct", if mode == ProductMode::ByCount { "N" } else { "cutoff" }, samples))
}

pub fn main_theorem(p: &Params) -> Result<Outcome> {
    let m = p.m.unwrap_or(1);
    if m >= 3 && (p.n_grid.is_none() || p.basis.is_none()) {
        return Err(Error::InvalidInput("m ≥ 3 needs an explicit --n-grid and --basis".into()));
    }
    let grid = parse_or(&p.n_grid, || pipeline::default_grid(m))?;
    let basis: BasisSpec = parse_or(&p.basis, || pipeline::default_basis(m))?;
    let rescaled = p.rescaled.unwrap_or(false);
    let r = pipeline::main_theorem_pipeline(m, &grid, &basis, rescaled, p.precision()?)?;
    let tol = p.tol.unwrap_or(if m == 1 { 1e-6 } else { 1e-2 });
    let criterion = match (m, rescaled) {
        (1, false) => Some(2),
        (2, false) => Some(3),
        _ => None,
    };
    let fitted = r.fit.to_expansion(Direction::ToInfinity)?;
    let residuals = r.samples.iter().map(|&(n, v)| (n, v - fitted.eval(n))).collect();
    let samples = r.samples.clone();
    Ok(Outcome::new(format!("constant {:.9} ± {:.1e}, reference {:.9}", r.constant, r.uncertainty, r.reference), &r)?
        .check(Check::new("log det_ζ Δ", criterion, r.constant, r.reference, tol))
        .series("main-theorem", "n", samples)
        .series("main-theorem-residuals", "n", residuals))
}

pub fn cjk(p: &Params) -> Result<Outcome> {
    let grid = parse_or(&p.n_grid, pipeline::cjk_default_grid)?;
    let basis = parse_or(&p.basis, pipeline::cjk_basis)?;
    let r = pipeline::cjk_leading_coefficient(&grid, &basis)?;
    let tol = p.tol.unwrap_or(1e-4);
    Ok(Outcome::new(format!("n² coefficient {:.9}, 4G/π oracle {:.9}", r.leading, r.reference), &r)?
        .check(Check::new("double-integral oracle", Some(4), r.leading, r.reference, tol)))
}
