//! Bernoulli numbers (exact) and Bernoulli polynomials.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest supported Bernoulli index.
pub const MAX_BERNOULLI: usize = 256;

/// Exact `B_0, …, B_{2M+1}` (convention `B_1 = -1/2`).
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliTable {
    order: u32,
    values: Vec<BigRational>,
}

impl BernoulliTable {
    /// Table for truncation order `M`, holding indices up to `2M + 1`.
    pub fn new(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("order M must be at least 1"));
        }
        let top = 2 * order as usize + 1;
        if top > MAX_BERNOULLI {
            return Err(Error::CapExceeded {
                what: "Bernoulli index",
                value: top as u64,
                limit: MAX_BERNOULLI as u64,
            });
        }
        Ok(BernoulliTable {
            order,
            values: bernoulli_up_to(top),
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn get(&self, i: usize) -> Option<&BigRational> {
        self.values.get(i)
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }
}

/// `B_0 … B_top` from `Σ_{j=0}^{i} C(i+1, j) B_j = 0`.
fn bernoulli_up_to(top: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(top + 1);
    b.push(BigRational::one());
    for i in 1..=top {
        // C(i+1, j) built incrementally
        let mut binom = BigInt::one();
        let mut s = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            if j > 0 {
                binom = binom * BigInt::from(i + 2 - j) / BigInt::from(j);
            }
            s += BigRational::from_integer(binom.clone()) * bj;
        }
        b.push(-s / BigRational::from_integer(BigInt::from(i + 1)));
    }
    b
}

/// Exact Bernoulli number `B_i`.
pub fn bernoulli_number(i: usize) -> Result<BigRational> {
    if i > MAX_BERNOULLI {
        return Err(Error::CapExceeded {
            what: "Bernoulli index",
            value: i as u64,
            limit: MAX_BERNOULLI as u64,
        });
    }
    Ok(bernoulli_up_to(i).pop().expect("non-empty"))
}

pub(crate) fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Coefficients of the Bernoulli polynomial `B_i(t)`, lowest degree first.
pub fn bernoulli_polynomial(i: usize) -> Result<Vec<f64>> {
    if i > MAX_BERNOULLI {
        return Err(Error::CapExceeded {
            what: "Bernoulli index",
            value: i as u64,
            limit: MAX_BERNOULLI as u64,
        });
    }
    let b = bernoulli_up_to(i);
    // B_i(t) = Σ_j C(i, j) B_j t^{i-j}
    let mut coeffs = vec![0.0; i + 1];
    let mut binom = BigInt::one();
    for (j, bj) in b.iter().enumerate() {
        if j > 0 {
            binom = binom * BigInt::from(i + 1 - j) / BigInt::from(j);
        }
        coeffs[i - j] = to_f64(&(BigRational::from_integer(binom.clone()) * bj));
    }
    Ok(coeffs)
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// `B_i(x - ⌊x⌋)`.
pub fn periodic_bernoulli(i: usize, x: f64) -> Result<f64> {
    if i == 0 {
        return Err(Error::invalid("periodic Bernoulli index must be at least 1"));
    }
    Ok(horner(&bernoulli_polynomial(i)?, x - x.floor()))
}

/// A Bernoulli polynomial with precomputed coefficients.
#[derive(Debug, Clone)]
pub(crate) struct PeriodicBernoulli {
    coeffs: Vec<f64>,
}

impl PeriodicBernoulli {
    pub fn new(i: usize) -> Result<Self> {
        Ok(PeriodicBernoulli {
            coeffs: bernoulli_polynomial(i)?,
        })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, x - x.floor())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn numbers() {
        assert_eq!(bernoulli_number(0).unwrap(), q(1, 1));
        assert_eq!(bernoulli_number(1).unwrap(), q(-1, 2));
        assert_eq!(bernoulli_number(2).unwrap(), q(1, 6));
        assert_eq!(bernoulli_number(4).unwrap(), q(-1, 30));
        assert_eq!(bernoulli_number(12).unwrap(), q(-691, 2730));
        let t = BernoulliTable::new(6).unwrap();
        for i in (3..=13).step_by(2) {
            assert!(t.get(i).unwrap().is_zero());
        }
        assert!(bernoulli_number(MAX_BERNOULLI + 1).is_err());
    }

    #[test]
    fn periodic_values() {
        assert!((periodic_bernoulli(1, 0.25).unwrap() + 0.25).abs() < 1e-15);
        assert_eq!(periodic_bernoulli(3, 5.0).unwrap(), 0.0);
        assert!((periodic_bernoulli(2, 1.5).unwrap() + 1.0 / 12.0).abs() < 1e-15);
    }
}
