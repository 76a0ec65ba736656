//! A real value paired with a rigorous error radius.
//!
//! Arithmetic propagates radii with the exact interval-style expansions
//! (`|xy - x'y'| ≤ |x| r_y + |y| r_x + r_x r_y`, and
//! `|x^n - x'^n| ≤ (|x| + r)^n - |x|^n`), so second-order terms are never
//! dropped. Each operation also adds a few ulps of the result for its own
//! rounding.

use serde::{Deserialize, Serialize};

use crate::UNIT_ROUNDOFF;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certified {
    pub value: f64,
    /// Upper bound on `|true value - value|`.
    pub radius: f64,
}

impl Certified {
    pub const ZERO: Certified = Certified { value: 0.0, radius: 0.0 };
    pub const ONE: Certified = Certified { value: 1.0, radius: 0.0 };

    pub fn new(value: f64, radius: f64) -> Self {
        debug_assert!(radius >= 0.0, "negative radius {radius}");
        Certified { value, radius }
    }

    pub fn exact(value: f64) -> Self {
        Certified { value, radius: 0.0 }
    }

    pub fn lo(&self) -> f64 {
        self.value - self.radius
    }

    pub fn hi(&self) -> f64 {
        self.value + self.radius
    }

    /// Largest possible magnitude of the true value.
    pub fn mag(&self) -> f64 {
        self.value.abs() + self.radius
    }

    /// `Some(±1)` when the sign of the true value is decided.
    pub fn sign(&self) -> Option<i8> {
        if self.value.abs() > self.radius {
            Some(if self.value > 0.0 { 1 } else { -1 })
        } else {
            None
        }
    }

    pub fn is_certainly_positive(&self) -> bool {
        self.lo() > 0.0
    }

    pub fn is_certainly_negative(&self) -> bool {
        self.hi() < 0.0
    }

    pub fn add(self, other: Certified) -> Certified {
        let v = self.value + other.value;
        Certified::new(v, self.radius + other.radius + UNIT_ROUNDOFF * v.abs())
    }

    pub fn sub(self, other: Certified) -> Certified {
        let v = self.value - other.value;
        Certified::new(v, self.radius + other.radius + UNIT_ROUNDOFF * v.abs())
    }

    pub fn mul(self, other: Certified) -> Certified {
        let v = self.value * other.value;
        let r = self.value.abs() * other.radius
            + other.value.abs() * self.radius
            + self.radius * other.radius
            + UNIT_ROUNDOFF * v.abs();
        Certified::new(v, r)
    }

    /// Multiplication by an exactly known scalar.
    pub fn scale(self, s: f64) -> Certified {
        let v = self.value * s;
        Certified::new(v, self.radius * s.abs() + UNIT_ROUNDOFF * v.abs())
    }

    pub fn powi(self, n: u32) -> Certified {
        if n == 0 {
            return Certified::ONE;
        }
        let v = self.value.powi(n as i32);
        let a = self.value.abs();
        let spread = (a + self.radius).powi(n as i32) - a.powi(n as i32);
        // powi of degree n accumulates at most ~2 log2(n) roundings
        let rounding = 2.0 * (n as f64).log2().ceil().max(1.0) * UNIT_ROUNDOFF * v.abs();
        Certified::new(v, spread.max(0.0) * (1.0 + 4.0 * UNIT_ROUNDOFF) + rounding)
    }

    /// Widens the radius by `extra`.
    pub fn widen(self, extra: f64) -> Certified {
        Certified::new(self.value, self.radius + extra)
    }
}
