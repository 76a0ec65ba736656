//! Compensated summation and a small double-double type.
//!
//! [`Neumaier`] is the default accumulator for lattice sums. [`DoubleDouble`]
//! carries roughly 106 bits and backs the extended-precision mode of the
//! head-bound computation.

use std::ops::{Add, AddAssign, Div, Mul};

/// Error-free transformation `a + b = s + e`.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free transformation `a * b = p + e` (requires a correctly rounded fma).
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Kahan–Babuška–Neumaier running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Merges another partial sum (used by parallel reductions).
    pub fn merge(mut self, other: Neumaier) -> Neumaier {
        self.add(other.sum);
        self.add(other.comp);
        self
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Self {
        let (s, e) = two_sum(hi, lo);
        DoubleDouble { hi: s, lo: e }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn recip(self) -> Self {
        DoubleDouble::ONE / self
    }

    /// Integer power by binary exponentiation; negative exponents invert.
    pub fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = DoubleDouble::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Square root by one Newton step on the `f64` estimate.
    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return DoubleDouble::ZERO;
        }
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = ((self.hi - p) - e + self.lo) / (2.0 * x);
        DoubleDouble::renorm(x, r)
    }
}

impl Add for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn add(self, rhs: DoubleDouble) -> DoubleDouble {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = two_sum(s, e + t);
        DoubleDouble::renorm(s, e + f)
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, rhs: DoubleDouble) {
        *self = *self + rhs;
    }
}

impl Mul for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn mul(self, rhs: DoubleDouble) -> DoubleDouble {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        DoubleDouble::renorm(p, e)
    }
}

impl Div for DoubleDouble {
    type Output = DoubleDouble;
    fn div(self, rhs: DoubleDouble) -> DoubleDouble {
        let q1 = self.hi / rhs.hi;
        let r = self + DoubleDouble::from_f64(-1.0) * (rhs * DoubleDouble::from_f64(q1));
        let q2 = r.hi / rhs.hi;
        let r = r + DoubleDouble::from_f64(-1.0) * (rhs * DoubleDouble::from_f64(q2));
        let q3 = r.hi / rhs.hi;
        DoubleDouble::renorm(q1, q2) + DoubleDouble::from_f64(q3)
    }
}

impl std::iter::Sum for DoubleDouble {
    fn sum<I: Iterator<Item = DoubleDouble>>(iter: I) -> Self {
        iter.fold(DoubleDouble::ZERO, |a, b| a + b)
    }
}
