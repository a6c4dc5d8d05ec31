//! Truncated power series in `t₁`, the coefficient ring of the dressing
//! computation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::field::{DiffRing, Field};

/// `Σ_{j ≤ order} c_j t₁^j`. Coefficients above `order` are unknown; an
/// `order` of `None` marks an exact polynomial, `Some(-1)` a series about which
/// nothing is known any more (a derivative ran past the known coefficients).
#[derive(Debug, Clone)]
pub struct Series<F: Field> {
    coeffs: Vec<F>,
    order: Option<isize>,
}

impl<F: Field> Series<F> {
    /// Truncated series, exact through `t₁^order`.
    pub fn truncated(mut coeffs: Vec<F>, order: usize) -> Self {
        coeffs.resize(order + 1, F::zero());
        Self { coeffs, order: Some(order as isize) }.normalized()
    }

    pub fn polynomial(coeffs: Vec<F>) -> Self {
        Self { coeffs, order: None }.normalized()
    }

    pub fn constant(c: F) -> Self {
        Self::polynomial(vec![c])
    }

    fn normalized(mut self) -> Self {
        if let Some(n) = self.order {
            self.coeffs.truncate((n + 1).max(0) as usize);
        }
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    pub fn order(&self) -> Option<isize> {
        self.order
    }

    /// Coefficient of `t₁^j` (zero past the stored length).
    pub fn coeff(&self, j: usize) -> F {
        self.coeffs.get(j).cloned().unwrap_or_else(F::zero)
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    /// `d/dt₁`; a truncated series loses one order.
    pub fn derivative(&self) -> Self {
        let order = self.order.map(|n| (n - 1).max(-1));
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c.clone() * F::from_int(j as i64))
            .collect();
        Self { coeffs, order }.normalized()
    }

    /// Antiderivative with integration constant `c0`; gains one order.
    pub fn integrate(&self, c0: F) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(c0);
        for (j, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.clone() / F::from_int(j as i64 + 1));
        }
        Self { coeffs, order: self.order.map(|n| n + 1) }.normalized()
    }

    /// Evaluate at `t₁ = t` (only meaningful for small `t` when truncated).
    pub fn eval(&self, t: F) -> F {
        self.coeffs
            .iter()
            .rev()
            .fold(F::zero(), |acc, c| acc * t.clone() + c.clone())
    }

    fn min_order(a: Option<isize>, b: Option<isize>) -> Option<isize> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    /// True when every known coefficient except the constant vanishes.
    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero())
    }
}

impl<F: Field> PartialEq for Series<F> {
    fn eq(&self, other: &Self) -> bool {
        let order = Self::min_order(self.order, other.order);
        let n = match order {
            Some(n) => (n + 1).max(0) as usize,
            None => self.coeffs.len().max(other.coeffs.len()),
        };
        (0..n).all(|j| self.coeff(j) == other.coeff(j))
    }
}

impl<F: Field> Add for Series<F> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let order = Self::min_order(self.order, rhs.order);
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|j| self.coeff(j) + rhs.coeff(j)).collect();
        Self { coeffs, order }.normalized()
    }
}

impl<F: Field> Neg for Series<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
            order: self.order,
        }
    }
}

impl<F: Field> Sub for Series<F> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<F: Field> Mul for Series<F> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let order = Self::min_order(self.order, rhs.order);
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Self { coeffs: Vec::new(), order };
        }
        let mut len = self.coeffs.len() + rhs.coeffs.len() - 1;
        if let Some(n) = order {
            len = len.min((n + 1).max(0) as usize);
        }
        let mut coeffs = vec![F::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self { coeffs, order }.normalized()
    }
}

impl<F: Field> DiffRing for Series<F> {
    fn zero() -> Self {
        Self::polynomial(Vec::new())
    }
    fn one() -> Self {
        Self::constant(F::one())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn derivative(&self) -> Self {
        Series::derivative(self)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::constant(F::from_ratio(num, den))
    }
}

impl<F: Field> Series<F> {
    /// True when a derivative ran past the known coefficients somewhere upstream.
    pub fn is_exhausted(&self) -> bool {
        self.order == Some(-1)
    }
}

impl<F: Field> fmt::Display for Series<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        }
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if j > 0 {
                write!(f, " + ")?;
            }
            match j {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c} t1")?,
                _ => write!(f, "{c} t1^{j}")?,
            }
        }
        if let Some(n) = self.order {
            write!(f, " + O(t1^{})", n + 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn truncation_bookkeeping() {
        let a = Series::truncated(vec![q(1), q(2), q(3)], 2);
        let b = Series::polynomial(vec![q(0), q(1)]);
        let prod = a.clone() * b;
        assert_eq!(prod.order(), Some(2));
        assert_eq!(prod.coeffs(), &[q(0), q(1), q(2)]);
        let d = a.derivative();
        assert_eq!(d.order(), Some(1));
        assert_eq!(d.coeffs(), &[q(2), q(6)]);
        let i = d.integrate(q(1));
        assert_eq!(i, a);
    }

    #[test]
    fn exhausted_derivative() {
        let a = Series::truncated(vec![q(5)], 0);
        assert!(a.derivative().is_exhausted());
        assert!((a.derivative() * Series::truncated(vec![q(1)], 4)).is_exhausted());
    }
}
