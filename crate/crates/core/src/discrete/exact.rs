//! High-precision evaluation of the rescaled spectral product
//! `∏_{k≠0} Σ_i 4 sin²(π k_i / n)`, which equals `n^m · trees(T^m_n)`.
//!
//! The product is an integer; evaluating it with enough bits and rounding
//! recovers it exactly, which is then compared with the Kirchhoff count.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigUint;
use num_traits::Zero;

use super::{log_det_rescaled, DiscreteTorus};
use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

/// A real number rounded to the nearest integer.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundedInteger {
    pub value: BigUint,
    /// Distance from the evaluated real to `value`.
    pub distance: f64,
}

/// Nearest integer to a non-negative `BigFloat`.
fn round_to_integer(x: &BigFloat) -> Result<RoundedInteger> {
    if x.is_zero() {
        return Ok(RoundedInteger {
            value: BigUint::zero(),
            distance: 0.0,
        });
    }
    let (words, _bits, sign, exponent, _) = x
        .as_raw_parts()
        .ok_or_else(|| Error::Numerical("non-finite high-precision product".into()))?;
    if sign == Sign::Neg {
        return Err(Error::Numerical("negative spectral product".into()));
    }
    let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
    let mantissa = BigUint::from_bytes_le(&bytes);
    // value = mantissa · 2^(exponent - 64·len)
    let shift = i64::from(exponent) - 64 * words.len() as i64;
    if shift >= 0 {
        return Ok(RoundedInteger {
            value: mantissa << shift as usize,
            distance: 0.0,
        });
    }
    let sh = (-shift) as usize;
    let int = &mantissa >> sh;
    let rem = &mantissa - (&int << sh);
    // fractional part as f64 from its top bits
    let frac = if sh > 60 {
        let top: BigUint = &rem >> (sh - 60);
        let t: u64 = top.try_into().unwrap_or(u64::MAX);
        t as f64 / (1u64 << 60) as f64
    } else {
        let t: u64 = rem.try_into().unwrap_or(0);
        t as f64 / (1u128 << sh) as f64
    };
    if frac >= 0.5 {
        Ok(RoundedInteger {
            value: int + 1u32,
            distance: 1.0 - frac,
        })
    } else {
        Ok(RoundedInteger {
            value: int,
            distance: frac,
        })
    }
}

/// Working precision (bits) for the product of a torus: the size of the
/// result estimated from the double-precision log-determinant plus guard bits
/// for cancellation in `2 - 2cos` and accumulated rounding.
pub fn working_precision(t: &DiscreteTorus) -> usize {
    let result_bits = (log_det_rescaled(t) / std::f64::consts::LN_2).max(1.0);
    let n_bits = f64::from(t.n()).log2().ceil() as usize;
    let count_bits = (t.size() as f64).log2().ceil() as usize;
    let p = result_bits.ceil() as usize + 2 * n_bits + 2 * count_bits + 96;
    p.div_ceil(64) * 64
}

/// `∏_{k≠0} λ'_k` evaluated with [`working_precision`] bits and rounded.
pub fn rescaled_spectral_product(t: &DiscreteTorus) -> Result<RoundedInteger> {
    rescaled_spectral_product_with(t, working_precision(t))
}

pub fn rescaled_spectral_product_with(t: &DiscreteTorus, prec: usize) -> Result<RoundedInteger> {
    let n = t.n();
    let mut cc = Consts::new().map_err(|e| Error::Numerical(format!("{e:?}")))?;
    let wp = prec + 64;
    // 2 - 2cos(2πk/n) for k = 0..=n/2 via the Chebyshev recurrence
    let theta = cc
        .pi(wp, RM)
        .mul(&BigFloat::from_u32(2, wp), wp, RM)
        .div(&BigFloat::from_u32(n, wp), wp, RM);
    let c1 = theta.cos(wp, RM, &mut cc);
    let two = BigFloat::from_u32(2, wp);
    let half = (n / 2) as usize;
    let mut cos_k = Vec::with_capacity(half + 1);
    cos_k.push(BigFloat::from_u32(1, wp));
    if half >= 1 {
        cos_k.push(c1.clone());
    }
    let two_c1 = c1.mul(&two, wp, RM);
    for k in 2..=half {
        let next = two_c1.mul(&cos_k[k - 1], wp, RM).sub(&cos_k[k - 2], wp, RM);
        cos_k.push(next);
    }
    let s: Vec<(BigFloat, u32)> = cos_k
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let v = two.sub(&c.mul(&two, wp, RM), wp, RM);
            let mult = if k == 0 || 2 * k == n as usize { 1 } else { 2 };
            (v, mult)
        })
        .collect();
    // product over the folded lattice, skipping the origin
    let m = t.m() as usize;
    let len = s.len();
    let mut idx = vec![0usize; m];
    let mut product = BigFloat::from_u32(1, wp);
    loop {
        if idx.iter().any(|&i| i != 0) {
            let mut lambda = BigFloat::from_u32(0, wp);
            let mut mult = 1u32;
            for &i in &idx {
                lambda = lambda.add(&s[i].0, wp, RM);
                mult *= s[i].1;
            }
            for _ in 0..mult {
                product = product.mul(&lambda, wp, RM);
            }
        }
        let mut d = m;
        loop {
            if d == 0 {
                return round_to_integer(&product);
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < len {
                break;
            }
            idx[d] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_products() {
        for (m, n, want) in [(1u32, 2u32, 4u64), (1, 3, 9), (1, 10, 100), (2, 2, 128), (2, 3, 104976)] {
            let t = DiscreteTorus::new(m, n).unwrap();
            let r = rescaled_spectral_product(&t).unwrap();
            assert_eq!(r.value, BigUint::from(want), "m={m} n={n}");
            assert!(r.distance < 1e-20);
        }
    }

    #[test]
    fn rounding_helper() {
        let p = 128;
        let x = BigFloat::from_f64(12.75, p);
        let r = round_to_integer(&x).unwrap();
        assert_eq!(r.value, BigUint::from(13u32));
        assert!((r.distance - 0.25).abs() < 1e-15);
        let x = BigFloat::from_f64(2f64.powi(100), p);
        assert_eq!(round_to_integer(&x).unwrap().value, BigUint::from(1u32) << 100);
    }
}
