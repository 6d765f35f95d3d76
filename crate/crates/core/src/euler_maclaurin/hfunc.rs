//! Derivatives of `f^{-α}` along one axis, with `f = ω(n, x) + z²`.
//!
//! `∂^k f^{-α} = Σ_{ℓ<k} H_{k,ℓ} f^{-α-ℓ-1}`, where `H_{k,ℓ}` is a polynomial in
//! `g = ∂f` and its derivatives, built by
//! `H_{k,ℓ} = ∂H_{k-1,ℓ} - (α+ℓ) H_{k-1,ℓ-1} g`, `H_{1,0} = -α g`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A polynomial in `g, g', g'', …`: monomials keyed by exponent vectors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HPoly {
    terms: BTreeMap<Vec<u32>, f64>,
}

impl HPoly {
    fn add_term(&mut self, mut exps: Vec<u32>, c: f64) {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        let e = self.terms.entry(exps).or_insert(0.0);
        *e += c;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| *c != 0.0);
    }

    /// `∂_x` via the chain rule, `g^{(r)} → g^{(r+1)}`.
    fn derivative(&self) -> HPoly {
        let mut out = HPoly::default();
        for (exps, &c) in &self.terms {
            for (r, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut next = exps.clone();
                next[r] -= 1;
                if next.len() <= r + 1 {
                    next.resize(r + 2, 0);
                }
                next[r + 1] += 1;
                out.add_term(next, c * f64::from(e));
            }
        }
        out.prune();
        out
    }

    /// Product with `s · g`.
    fn times_g(&self, s: f64) -> HPoly {
        let mut out = HPoly::default();
        for (exps, &c) in &self.terms {
            let mut next = exps.clone();
            if next.is_empty() {
                next.push(0);
            }
            next[0] += 1;
            out.add_term(next, c * s);
        }
        out
    }

    fn plus(mut self, other: &HPoly) -> HPoly {
        for (exps, &c) in &other.terms {
            self.add_term(exps.clone(), c);
        }
        self.prune();
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of factors `g^{(r)}` in each monomial (all equal to `ℓ + 1`).
    pub fn degrees(&self) -> Vec<u32> {
        self.terms.keys().map(|e| e.iter().sum()).collect()
    }

    /// Value given `gd[r] = g^{(r)}(x)`.
    pub fn eval(&self, gd: &[f64]) -> f64 {
        let mut s = 0.0;
        for (exps, &c) in &self.terms {
            let mut v = c;
            for (r, &e) in exps.iter().enumerate() {
                if e > 0 {
                    v *= gd[r].powi(e as i32);
                }
            }
            s += v;
        }
        s
    }
}

/// `H_{k,ℓ}` for one exponent `α` and `k ≤ k_max`.
#[derive(Debug, Clone)]
pub struct HTable {
    alpha: f64,
    k_max: u32,
    /// `table[k][ℓ]`, `k ≥ 1`, `ℓ < k`.
    table: Vec<Vec<HPoly>>,
}

impl HTable {
    pub fn new(alpha: f64, k_max: u32) -> Self {
        let mut table: Vec<Vec<HPoly>> = vec![Vec::new()];
        if k_max >= 1 {
            let mut h10 = HPoly::default();
            h10.add_term(vec![1], -alpha);
            table.push(vec![h10]);
        }
        for k in 2..=k_max as usize {
            let prev = &table[k - 1];
            let mut row = Vec::with_capacity(k);
            for l in 0..k {
                let d = if l < k - 1 { prev[l].derivative() } else { HPoly::default() };
                let g = if l >= 1 {
                    prev[l - 1].times_g(-(alpha + l as f64))
                } else {
                    HPoly::default()
                };
                row.push(d.plus(&g));
            }
            table.push(row);
        }
        HTable { alpha, k_max, table }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn poly(&self, k: u32, l: u32) -> Option<&HPoly> {
        if k == 0 || k > self.k_max || l >= k {
            return None;
        }
        Some(&self.table[k as usize][l as usize])
    }
}

/// `t` reduced to `[-1/2, 1/2]` modulo 1, so that endpoints map to exact zeros.
#[inline]
fn reduce(t: f64) -> f64 {
    t - t.round()
}

/// `ω(n, x) = (n²/π²) sin²(πx/n)` for one axis.
#[inline]
pub fn omega_axis(n: f64, x: f64) -> f64 {
    let s = (PI * reduce(x / n)).sin();
    n * n / (PI * PI) * s * s
}

/// `g^{(r)}(x)` for `r = 0..=order`, with `g = ∂_x ω = (n/π) sin(2πx/n)`.
pub fn g_derivatives(n: f64, x: f64, order: u32) -> Vec<f64> {
    let theta = 2.0 * PI * reduce(x / n);
    let (s, c) = theta.sin_cos();
    let w = 2.0 * PI / n;
    let mut scale = n / PI;
    (0..=order)
        .map(|r| {
            let v = match r % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            } * scale;
            scale *= w;
            v
        })
        .collect()
}

/// `H_{k,ℓ}(∂_x f)` at `(n, x)`; `z` does not enter.
pub fn h_recursion_eval(k: u32, l: u32, n: f64, x: f64, alpha: f64) -> Result<f64> {
    if k == 0 || l >= k {
        return Err(Error::invalid(format!("need 0 ≤ ℓ < k, got k = {k}, ℓ = {l}")));
    }
    let t = HTable::new(alpha, k);
    let gd = g_derivatives(n, x, k);
    Ok(t.poly(k, l).expect("in range").eval(&gd))
}

/// `∂_x^k (ω + rest + z²)^{-α}` reassembled from the `H_{k,ℓ}`.
pub fn derivative_via_h(k: u32, n: f64, x: f64, rest: f64, z: f64, alpha: f64) -> f64 {
    let f = omega_axis(n, x) + rest + z * z;
    if k == 0 {
        return f.powf(-alpha);
    }
    let t = HTable::new(alpha, k);
    let gd = g_derivatives(n, x, k);
    (0..k)
        .map(|l| t.poly(k, l).expect("in range").eval(&gd) * f.powf(-alpha - f64::from(l) - 1.0))
        .sum()
}
