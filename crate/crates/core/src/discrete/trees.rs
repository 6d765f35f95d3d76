//! Exact spanning-tree counts of discrete tori (Kirchhoff's theorem).
//!
//! The count is the determinant of the reduced graph Laplacian. It is
//! computed modulo word-size primes and reconstructed by Chinese remaindering.
//! Modulo each prime the determinant comes from banded elimination: vertices
//! are ordered `0, n-1, 1, n-2, …` along every axis so that cycle neighbours
//! are at most two positions apart, giving bandwidth `2 n^{m-1}`.
//!
//! For larger tori the leading axes are first block-diagonalized by the
//! discrete Fourier transform over `F_p` (primes are chosen with `n | p - 1`);
//! each block is a smaller torus Laplacian plus a scalar shift and is again
//! eliminated. Both paths are exact; tests cross-check them against each
//! other and against fraction-free elimination over the integers.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::DiscreteTorus;
use crate::error::{Error, Result};
use crate::numerics::modular::{crt, is_prime, primes_with_roots, Montgomery};

/// Largest vertex count accepted by [`spanning_tree_count`].
pub const MAX_TREE_VERTICES: u64 = 4096;

/// Block elimination budget (mulmods per prime) used to pick how many axes to
/// Fourier-transform.
const BLOCK_BUDGET: u64 = 1 << 21;

/// Position of coordinate `x` in the zigzag order `0, n-1, 1, n-2, …`.
#[inline]
fn zigzag(x: u32, n: u32) -> u32 {
    if 2 * x < n {
        2 * x
    } else {
        2 * (n - x) - 1
    }
}

/// Band matrix modulo `p` with `w` diagonals on either side of the main one.
struct Band {
    w: usize,
    data: Vec<u64>,
}

impl Band {
    fn new(size: usize, w: usize) -> Self {
        Band {
            w,
            data: vec![0; size * (2 * w + 1)],
        }
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut u64 {
        debug_assert!(i.abs_diff(j) <= self.w);
        &mut self.data[i * (2 * self.w + 1) + (j + self.w - i)]
    }

    /// Determinant of the leading `rows × rows` block, or `None` if a zero
    /// pivot shows up (the caller then moves on to another prime).
    ///
    /// Division-free: row `i` is replaced by `piv·row_i - a_ik·row_k`, which
    /// scales the determinant by `piv`; the accumulated scale is divided out
    /// once at the end.
    fn det(mut self, rows: usize, f: &Montgomery) -> Option<u64> {
        let w = self.w;
        let stride = 2 * w + 1;
        let mut num = f.one();
        let mut den = f.one();
        for k in 0..rows {
            let piv = self.data[k * stride + w];
            if piv == 0 {
                return None;
            }
            num = f.mul(num, piv);
            let last = (k + w).min(rows.saturating_sub(1));
            for i in k + 1..=last {
                // column k of row i sits at offset k + w - i
                let aik = self.data[i * stride + (k + w - i)];
                if aik == 0 {
                    continue;
                }
                den = f.mul(den, piv);
                let (head, tail) = self.data.split_at_mut(i * stride);
                let row_k = &head[k * stride..(k + 1) * stride];
                let row_i = &mut tail[..stride];
                for j in k + 1..=last {
                    let oi = j + w - i;
                    let v = f.mul(piv, row_i[oi]);
                    row_i[oi] = f.sub(v, f.mul(aik, row_k[j + w - k]));
                }
                // the rest of row i is only scaled
                for j in last + 1..=(i + w).min(rows - 1) {
                    let oi = j + w - i;
                    row_i[oi] = f.mul(piv, row_i[oi]);
                }
            }
        }
        Some(f.mul(num, f.inv(den)))
    }
}

/// Torus Laplacian `L_r + shift·I` on `n^r` vertices in zigzag order.
fn torus_band(r: u32, n: u32, shift: u64, f: &Montgomery) -> Band {
    let size = (n as usize).pow(r);
    let w = if r == 0 { 0 } else { 2 * (n as usize).pow(r - 1) };
    let mut b = Band::new(size, w.min(size.saturating_sub(1)));
    let minus_one = f.from_i64(-1);
    let diag = f.add(f.from_i64(2 * i64::from(r)), shift);
    let mut coords = vec![0u32; r as usize];
    let index = |c: &[u32]| -> usize {
        c.iter()
            .rev()
            .fold(0usize, |acc, &x| acc * n as usize + zigzag(x, n) as usize)
    };
    for _ in 0..size {
        let i = index(&coords);
        *b.at(i, i) = diag;
        for axis in 0..r as usize {
            for step in [1, n - 1] {
                let mut nb = coords.clone();
                nb[axis] = (coords[axis] + step) % n;
                let j = index(&nb);
                let e = b.at(i, j);
                *e = f.add(*e, minus_one);
            }
        }
        for c in coords.iter_mut() {
            *c += 1;
            if *c < n {
                break;
            }
            *c = 0;
        }
    }
    b
}

struct Fourier<'a> {
    f: &'a Montgomery,
    n: u32,
    /// `2 - ζ^k - ζ^{-k}` for `k = 0..n`, Montgomery form.
    shifts: Vec<u64>,
}

impl Fourier<'_> {
    /// `det(L_r + s·I)` with `q` leading axes transformed.
    fn det_shifted(&self, r: u32, s: u64, q: u32) -> Option<u64> {
        if r == 0 {
            return Some(s);
        }
        if q == 0 {
            let size = (self.n as usize).pow(r);
            return torus_band(r, self.n, s, self.f).det(size, self.f);
        }
        let mut acc = self.f.one();
        for &c in &self.shifts {
            let d = self.det_shifted(r - 1, self.f.add(s, c), q - 1)?;
            acc = self.f.mul(acc, d);
        }
        Some(acc)
    }

    /// Pseudo-determinant of `L_r` (product of nonzero eigenvalues),
    /// i.e. `n^r · trees(T^r_n)`.
    fn pdet(&self, r: u32, q: u32) -> Option<u64> {
        if r == 0 {
            return Some(self.f.one());
        }
        if q == 0 {
            let size = (self.n as usize).pow(r);
            let reduced = torus_band(r, self.n, 0, self.f).det(size - 1, self.f)?;
            let nr = self.f.pow(self.f.to_mont(u64::from(self.n)), u64::from(r));
            return Some(self.f.mul(reduced, nr));
        }
        let mut acc = self.pdet(r - 1, q - 1)?;
        for &c in &self.shifts[1..] {
            let d = self.det_shifted(r - 1, c, q - 1)?;
            acc = self.f.mul(acc, d);
        }
        Some(acc)
    }
}

/// A primitive `n`-th root of unity mod `p` (plain residue), found without
/// factoring `p - 1`.
fn nth_root(p: u64, n: u32, f: &Montgomery) -> u64 {
    let n = u64::from(n);
    let mut prime_divisors = Vec::new();
    let mut rest = n;
    let mut d = 2;
    while d * d <= rest {
        if rest % d == 0 {
            prime_divisors.push(d);
            while rest % d == 0 {
                rest /= d;
            }
        }
        d += 1;
    }
    if rest > 1 {
        prime_divisors.push(rest);
    }
    let one = f.one();
    for g in 2u64.. {
        let w = f.pow(f.to_mont(g), (p - 1) / n);
        if prime_divisors.iter().all(|&q| f.pow(w, n / q) != one) {
            return f.from_mont(w);
        }
    }
    unreachable!()
}

/// How many leading axes to Fourier-transform for an `m`-torus of side `n`.
pub fn fourier_axes(m: u32, n: u32) -> u32 {
    let size = u64::from(n).pow(m);
    for q in 0..m {
        let r = m - q;
        let w = 2 * u64::from(n).pow(r - 1);
        if size.saturating_mul(w * w) <= BLOCK_BUDGET {
            return q;
        }
    }
    m - 1
}

/// `trees(T^m_n) mod p` using `q` Fourier-transformed axes, or `None` when the
/// prime is unlucky (a zero pivot).
pub fn tree_count_mod(t: &DiscreteTorus, p: u64, q: u32) -> Option<u64> {
    assert!(is_prime(p) && p > 2);
    let (m, n) = (t.m(), t.n());
    let f = Montgomery::new(p);
    let shifts = if q > 0 {
        assert_eq!((p - 1) % u64::from(n), 0, "prime must admit n-th roots of unity");
        let zeta = f.to_mont(nth_root(p, n, &f));
        let two = f.to_mont(2);
        (0..n)
            .map(|k| {
                let a = f.pow(zeta, u64::from(k));
                let b = f.pow(zeta, u64::from((n - k) % n));
                f.sub(f.sub(two, a), b)
            })
            .collect()
    } else {
        Vec::new()
    };
    let fourier = Fourier { f: &f, n, shifts };
    let pdet = fourier.pdet(m, q.min(m - 1))?;
    let size = f.to_mont(t.size() % p);
    Some(f.from_mont(f.mul(pdet, f.inv(size))))
}

/// Upper bound on `log2 trees`, from the Hadamard inequality for the
/// positive-definite reduced Laplacian: `trees ≤ (2m)^{N-1}`.
pub fn hadamard_bits(t: &DiscreteTorus) -> f64 {
    (t.size() as f64 - 1.0) * f64::from(2 * t.m()).log2()
}

/// Exact number of spanning trees, for tori with at most 4096 vertices.
pub fn spanning_tree_count(t: &DiscreteTorus) -> Result<BigUint> {
    if t.size() > MAX_TREE_VERTICES {
        return Err(Error::CapExceeded {
            what: "vertices for spanning-tree count",
            value: t.size(),
            limit: MAX_TREE_VERTICES,
        });
    }
    spanning_tree_count_with(t, fourier_axes(t.m(), t.n()))
}

/// [`spanning_tree_count`] with an explicit number of Fourier axes.
///
/// Primes are added until their product exceeds the tree count: the count is
/// bounded by the Hadamard bound, and in practice by the floating-point
/// spectral estimate plus 64 bits. One further prime confirms the
/// reconstruction; if it disagrees, primes are added up to the Hadamard bound.
pub fn spanning_tree_count_with(t: &DiscreteTorus, q: u32) -> Result<BigUint> {
    let hard = hadamard_bits(t) + 2.0;
    let estimate = (super::log_det_rescaled(t) - (t.size() as f64).ln()) / std::f64::consts::LN_2;
    let soft = (estimate + 64.0).min(hard);
    let mut residues: Vec<(u64, u64)> = Vec::new();
    let mut bits = 0.0;
    let mut primes = primes_with_roots(u64::from(t.n()));
    let mut next_residue = |residues: &mut Vec<(u64, u64)>| -> Result<f64> {
        for p in primes.by_ref() {
            if let Some(r) = tree_count_mod(t, p, q) {
                residues.push((r, p));
                return Ok((p as f64).log2());
            }
        }
        Err(Error::Numerical("ran out of primes".into()))
    };
    while bits < soft {
        bits += next_residue(&mut residues)?;
    }
    let candidate = crt(&residues);
    let mut check = Vec::new();
    next_residue(&mut check)?;
    let (r, p) = check[0];
    if (&candidate % p) == BigUint::from(r) {
        return Ok(candidate);
    }
    residues.push((r, p));
    bits += (p as f64).log2();
    while bits < hard {
        bits += next_residue(&mut residues)?;
    }
    Ok(crt(&residues))
}

/// Reduced unnormalized Laplacian (last vertex removed) as a dense integer
/// matrix, natural lexicographic vertex order. Intended for small tori.
pub fn reduced_laplacian_dense(t: &DiscreteTorus) -> Vec<Vec<i64>> {
    let (m, n) = (t.m() as usize, t.n());
    let size = t.size() as usize;
    let mut a = vec![vec![0i64; size]; size];
    let mut coords = vec![0u32; m];
    let index = |c: &[u32]| c.iter().fold(0usize, |acc, &x| acc * n as usize + x as usize);
    for _ in 0..size {
        let i = index(&coords);
        a[i][i] += 2 * m as i64;
        for axis in 0..m {
            for step in [1, n - 1] {
                let mut nb = coords.clone();
                nb[axis] = (coords[axis] + step) % n;
                a[i][index(&nb)] -= 1;
            }
        }
        for c in coords.iter_mut().rev() {
            *c += 1;
            if *c < n {
                break;
            }
            *c = 0;
        }
    }
    a.truncate(size - 1);
    for row in &mut a {
        row.truncate(size - 1);
    }
    a
}

/// Determinant by Bareiss fraction-free elimination over the integers.
pub fn bareiss_determinant(a: &[Vec<i64>]) -> BigInt {
    let k = a.len();
    if k == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = a
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for c in 0..k - 1 {
        if m[c][c].is_zero() {
            match (c + 1..k).find(|&r| !m[r][c].is_zero()) {
                Some(r) => {
                    m.swap(c, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in c + 1..k {
            for j in c + 1..k {
                let v = &m[i][j] * &m[c][c] - &m[i][c] * &m[c][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[c][c].clone();
    }
    sign * &m[k - 1][k - 1]
}

/// Spanning-tree count by dense fraction-free elimination; test oracle for
/// small tori.
pub fn spanning_tree_count_bareiss(t: &DiscreteTorus) -> BigUint {
    let d = bareiss_determinant(&reduced_laplacian_dense(t));
    assert!(!d.is_negative());
    d.to_biguint().expect("non-negative")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(m: u32, n: u32) -> DiscreteTorus {
        DiscreteTorus::new(m, n).unwrap()
    }

    #[test]
    fn zigzag_keeps_cycle_neighbours_close() {
        for n in 2..20u32 {
            let mut seen = vec![false; n as usize];
            for x in 0..n {
                let z = zigzag(x, n);
                assert!(!seen[z as usize]);
                seen[z as usize] = true;
                let y = (x + 1) % n;
                assert!(zigzag(x, n).abs_diff(zigzag(y, n)) <= 2);
            }
        }
    }

    #[test]
    fn small_examples() {
        assert_eq!(spanning_tree_count(&torus(1, 3)).unwrap(), BigUint::from(3u32));
        assert_eq!(spanning_tree_count(&torus(1, 4)).unwrap(), BigUint::from(4u32));
        assert_eq!(spanning_tree_count(&torus(1, 2)).unwrap(), BigUint::from(2u32));
        assert_eq!(spanning_tree_count(&torus(2, 2)).unwrap(), BigUint::from(32u32));
        // 3x3 torus: product of nonzero eigenvalues / 9
        assert_eq!(spanning_tree_count(&torus(2, 3)).unwrap(), BigUint::from(11664u32));
    }

    #[test]
    fn bareiss_agrees_on_small_tori() {
        for (m, n) in [(1, 7), (2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (4, 2)] {
            let t = torus(m, n);
            assert_eq!(spanning_tree_count(&t).unwrap(), spanning_tree_count_bareiss(&t), "m={m} n={n}");
        }
    }

    #[test]
    fn fourier_and_plain_elimination_agree_mod_p() {
        for (m, n) in [(2, 6), (2, 9), (3, 4), (3, 5), (4, 3)] {
            let t = torus(m, n);
            let p = primes_with_roots(u64::from(n)).next().unwrap();
            let plain = tree_count_mod(&t, p, 0).unwrap();
            for q in 1..m {
                assert_eq!(tree_count_mod(&t, p, q), Some(plain), "m={m} n={n} q={q}");
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            spanning_tree_count(&torus(2, 65)),
            Err(Error::CapExceeded { .. })
        ));
    }
}
