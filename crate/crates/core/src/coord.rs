//! Coordinate backends for circle arithmetic.
//!
//! Continuous models run on `f64` with exact comparisons (no epsilon
//! snapping: collisions are solved analytically by the policy engine).
//! Discrete models run on `Rational64` so every law is bit-exact.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

/// Scalar type usable as a coordinate / length on the unit circle.
pub trait Coord:
    Copy
    + PartialOrd
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Canonical representative in `[0, 1)`.
    fn wrap_unit(self) -> Self;

    /// Lossy view for reporting and statistics.
    fn to_f64(self) -> f64;

    /// `num / den`, used to build grid coordinates.
    fn from_ratio(num: i64, den: i64) -> Self;
}

impl Coord for f64 {
    fn wrap_unit(self) -> Self {
        let r = self.rem_euclid(1.0);
        // rem_euclid can return 1.0 for tiny negative inputs
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Coord for Rational64 {
    fn wrap_unit(self) -> Self {
        let f = self - self.floor();
        debug_assert!(!f.is_negative() && f < Rational64::one());
        f
    }

    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational64::new(num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_f64() {
        assert_eq!(1.25_f64.wrap_unit(), 0.25);
        assert_eq!((-0.25_f64).wrap_unit(), 0.75);
        assert_eq!(1.0_f64.wrap_unit(), 0.0);
        assert_eq!((-1e-20_f64).wrap_unit(), 0.0);
    }

    #[test]
    fn wrap_rational() {
        let x = Rational64::new(7, 4).wrap_unit();
        assert_eq!(x, Rational64::new(3, 4));
        let y = Rational64::new(-1, 4).wrap_unit();
        assert_eq!(y, Rational64::new(3, 4));
    }
}
