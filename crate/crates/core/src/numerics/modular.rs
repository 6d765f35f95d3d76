//! Word-size modular arithmetic and Chinese remaindering for exact integer
//! determinants.

use num_bigint::BigUint;
use num_traits::Zero;

/// Arithmetic modulo an odd prime `p < 2^63` in Montgomery form (R = 2^64).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Montgomery {
    p: u64,
    /// `-p^{-1} mod 2^64`
    p_neg_inv: u64,
    /// `R^2 mod p`
    r2: u64,
}

impl Montgomery {
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1 && p < (1 << 63), "modulus must be odd and below 2^63");
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = (u128::from(u64::MAX) + 1) % u128::from(p);
        let r2 = ((r * r) % u128::from(p)) as u64;
        Montgomery {
            p,
            p_neg_inv: inv.wrapping_neg(),
            r2,
        }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    fn reduce(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.p_neg_inv);
        let u = ((t + u128::from(m) * u128::from(self.p)) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    /// Converts a residue `0 <= a < p` into Montgomery form.
    #[inline]
    pub fn to_mont(&self, a: u64) -> u64 {
        self.reduce(u128::from(a % self.p) * u128::from(self.r2))
    }

    /// Converts a signed integer into Montgomery form.
    pub fn from_i64(&self, a: i64) -> u64 {
        let r = a.rem_euclid(self.p as i64) as u64;
        self.to_mont(r)
    }

    #[inline]
    pub fn from_mont(&self, a: u64) -> u64 {
        self.reduce(u128::from(a))
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(u128::from(a) * u128::from(b))
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    pub fn one(&self) -> u64 {
        self.to_mont(1)
    }

    pub fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a nonzero element (Montgomery form in and out).
    pub fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.p - 2)
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in SMALL {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Primes `p ≡ 1 (mod order)` below 2^62, descending, so that `F_p` holds a
/// primitive `order`-th root of unity.
pub fn primes_with_roots(order: u64) -> impl Iterator<Item = u64> {
    let order = order.max(2);
    let step = if order.is_multiple_of(2) { order } else { 2 * order };
    let top = (1u64 << 62) - 1;
    let mut candidate = top - (top - 1) % step;
    std::iter::from_fn(move || {
        while candidate > step {
            let c = candidate;
            candidate -= step;
            if is_prime(c) {
                return Some(c);
            }
        }
        None
    })
}

/// A primitive `order`-th root of unity modulo `p` (plain residue, not
/// Montgomery form). Requires `order | p - 1`.
pub fn root_of_unity(p: u64, order: u64) -> u64 {
    assert_eq!((p - 1) % order, 0);
    let factors = prime_factors(p - 1);
    let mut g = 2;
    loop {
        if factors.iter().all(|&q| powmod(g, (p - 1) / q, p) != 1) {
            return powmod(g, (p - 1) / order, p);
        }
        g += 1;
    }
}

/// Reconstructs the non-negative integer `x < ∏ p_i` from residues `x mod p_i`
/// with Garner's mixed-radix algorithm.
pub fn crt(residues: &[(u64, u64)]) -> BigUint {
    let k = residues.len();
    let mut digits: Vec<u64> = Vec::with_capacity(k);
    for i in 0..k {
        let (r, p) = residues[i];
        // v = (r - (d_0 + d_1 p_0 + ...)) / (p_0 ... p_{i-1}) mod p
        let mut acc = 0u64;
        let mut prod = 1u64;
        for j in 0..i {
            acc = (acc + mulmod(digits[j], prod, p)) % p;
            prod = mulmod(prod, residues[j].1 % p, p);
        }
        let diff = (r % p + p - acc) % p;
        let v = mulmod(diff, powmod(prod, p - 2, p), p);
        digits.push(v);
    }
    let mut x = BigUint::zero();
    for i in (0..k).rev() {
        x = x * residues[i].1 + digits[i];
    }
    x
}
