//! Compensated and extended-precision accumulation.
//!
//! Lattice sums here run over up to a few million terms of mixed sign and
//! magnitude. [`NeumaierSum`] keeps the error independent of the term count;
//! [`DoubleDouble`] carries roughly 106 bits and is used where the sum itself
//! is subsequently differenced against a large affine term.

use std::ops::AddAssign;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum in, keeping both compensation terms.
    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, v: f64) {
        self.add(v);
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        DoubleDouble { hi: v, lo: 0.0 }
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        DoubleDouble { hi, lo }
    }

    #[inline]
    pub fn add(self, b: DoubleDouble) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Which accumulator a lattice sum should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    #[default]
    Compensated,
    DoubleDouble,
}

/// Either accumulator behind one interface, so lattice loops are written once.
#[derive(Debug, Clone, Copy)]
pub enum Accumulator {
    Compensated(NeumaierSum),
    Extended(DoubleDouble),
}

impl Accumulator {
    pub fn new(precision: Precision) -> Self {
        match precision {
            Precision::Compensated => Accumulator::Compensated(NeumaierSum::new()),
            Precision::DoubleDouble => Accumulator::Extended(DoubleDouble::ZERO),
        }
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        match self {
            Accumulator::Compensated(s) => s.add(v),
            Accumulator::Extended(d) => *d = d.add_f64(v),
        }
    }

    pub fn merge(&mut self, other: &Accumulator) {
        match (self, other) {
            (Accumulator::Compensated(a), Accumulator::Compensated(b)) => a.merge(b),
            (Accumulator::Extended(a), Accumulator::Extended(b)) => *a = a.add(*b),
            (a, b) => {
                let v = b.value();
                a.add(v);
            }
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Accumulator::Compensated(s) => s.value(),
            Accumulator::Extended(d) => d.to_f64(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(terms), 2.0);
        let naive: f64 = terms.iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn double_double_carries_low_bits() {
        let mut d = DoubleDouble::from_f64(1.0);
        for _ in 0..1000 {
            d = d.add_f64(1e-20);
        }
        d = d.add_f64(-1.0);
        assert!((d.to_f64() - 1e-17).abs() < 1e-30);
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (1..2000).map(|k| 1.0 / k as f64).collect();
        let whole = compensated_sum(xs.iter().copied());
        let (a, b) = xs.split_at(777);
        let mut left: NeumaierSum = a.iter().copied().collect();
        left.merge(&b.iter().copied().collect());
        assert!((left.value() - whole).abs() <= 1e-15 * whole);
    }
}
