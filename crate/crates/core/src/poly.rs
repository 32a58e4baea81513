//! Dense univariate polynomials over an integer-like coefficient ring.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_traits::{One, Zero};

/// Coefficients stored in ascending degree order; trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T> Poly<T>
where
    T: Clone + Zero + One + PartialEq,
{
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn one() -> Self {
        Poly::new(vec![T::one()])
    }

    /// Coefficients in ascending degree order.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }
}

impl<T> Poly<T>
where
    T: Clone + Zero + One + PartialEq + Add<Output = T> + Mul<Output = T>,
{
    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly { coeffs: Vec::new() };
        }
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }

    pub fn product<'a, I>(factors: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
        T: 'a,
    {
        factors.into_iter().fold(Poly::one(), |acc, f| acc.mul(f))
    }
}

impl<T> Poly<T>
where
    T: Clone + Integer,
{
    /// Coefficientwise reduction into `[0, m)`.
    pub fn reduce_mod(&self, m: &T) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.mod_floor(m)).collect())
    }

    /// Product in `(Z/mZ)[X]`, with both inputs reduced first.
    pub fn mul_mod(&self, other: &Self, m: &T) -> Self {
        self.reduce_mod(m).mul(&other.reduce_mod(m)).reduce_mod(m)
    }
}

impl<T> Neg for &Poly<T>
where
    T: Clone + Zero + One + PartialEq + Neg<Output = T>,
{
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly::new(self.coeffs.iter().cloned().map(|c| -c).collect())
    }
}

impl<T> Sub for &Poly<T>
where
    T: Clone + Zero + One + PartialEq + Sub<Output = T>,
{
    type Output = Poly<T>;
    fn sub(self, rhs: Self) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |v: &[T], i: usize| v.get(i).cloned().unwrap_or_else(T::zero);
        Poly::new(
            (0..n)
                .map(|i| get(&self.coeffs, i) - get(&rhs.coeffs, i))
                .collect(),
        )
    }
}

impl<T> fmt::Display for Poly<T>
where
    T: Clone + Zero + One + PartialEq + fmt::Display,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 if c.is_one() => write!(f, "X")?,
                1 => write!(f, "{c}*X")?,
                _ if c.is_one() => write!(f, "X^{i}")?,
                _ => write!(f, "{c}*X^{i}")?,
            }
        }
        Ok(())
    }
}
