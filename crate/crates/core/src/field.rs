//! Coefficient domains.
//!
//! The symbolic modules are generic over a [`Field`] (exact rationals in
//! practice, floats or complex numbers where a numeric check is wanted) and
//! the operator module is generic over a [`DiffRing`], a commutative ring
//! equipped with a derivation.

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::{BigRational, Ratio};
use num_traits::{Float, One, Zero};

/// Exact rational coefficients.
pub type Rational = BigRational;

/// Scalar coefficient field.
pub trait Field:
    Clone
    + Debug
    + Display
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
}

impl Field for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(BigInt::from(num), BigInt::from(den))
    }
}

impl Field for Ratio<i64> {
    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }
}

impl Field for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Field for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f32 / den as f32
    }
}

impl<T> Field for Complex<T>
where
    T: Float + Debug + Display + Send + Sync + 'static,
{
    fn from_ratio(num: i64, den: i64) -> Self {
        let n = T::from(num).expect("integer fits the float type");
        let d = T::from(den).expect("integer fits the float type");
        Complex::new(n / d, T::zero())
    }
}

/// Commutative ring with a derivation `derivative` (the action of ∂).
///
/// Implementors: [`crate::jetalg::JetPoly`] (∂ is the total derivative) and
/// [`crate::series::Series`] (∂ is d/dt₁).
pub trait DiffRing:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn derivative(&self) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;

    fn scale(&self, num: i64, den: i64) -> Self {
        self.clone() * Self::from_ratio(num, den)
    }
}

/// Generalized binomial coefficient `(n choose r)` for any integer `n`, `r ≥ 0`,
/// returned as an exact ratio.
pub fn binomial(n: i64, r: u32) -> Ratio<i64> {
    let mut acc = Ratio::<i64>::one();
    for j in 0..r as i64 {
        acc = acc * Ratio::new(n - j, j + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_with_negative_top() {
        assert_eq!(binomial(-1, 3), Ratio::from_integer(-1));
        assert_eq!(binomial(-1, 4), Ratio::from_integer(1));
        assert_eq!(binomial(-2, 2), Ratio::from_integer(3));
        assert_eq!(binomial(5, 2), Ratio::from_integer(10));
        assert_eq!(binomial(3, 5), Ratio::from_integer(0));
    }
}
