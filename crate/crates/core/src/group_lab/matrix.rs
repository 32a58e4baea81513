//! 2×2 matrices over F_ℓ and g-tuples of them.

use std::fmt;

use serde::Serialize;
use smallvec::SmallVec;

use crate::arith;
use crate::error::{Error, Result};
use crate::poly::Poly;

/// An odd prime ℓ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PrimeModulus(u32);

impl PrimeModulus {
    pub fn new(ell: u64) -> Result<Self> {
        if ell < 3 || ell > u32::MAX as u64 || !arith::is_prime(ell) {
            return Err(Error::domain(format!(
                "ell must be an odd prime, got {ell}"
            )));
        }
        Ok(PrimeModulus(ell as u32))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn reduce(self, v: i64) -> u32 {
        arith::reduce_i64(v, self.0 as u64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.0 as u64 - b as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    pub fn inv(self, a: u32) -> Option<u32> {
        arith::inv_mod(a as u64, self.0 as u64).map(|v| v as u32)
    }

    pub fn is_square(self, a: u32) -> bool {
        a.is_multiple_of(self.0) || arith::jacobi(a as u64, self.0 as u64) == 1
    }

    pub fn sqrt(self, a: u32) -> Option<u32> {
        arith::sqrt_mod(a as u64, self.0 as u64).map(|v| v as u32)
    }

    /// Nonzero residues `1..ℓ`.
    pub fn units(self) -> impl Iterator<Item = u32> {
        1..self.0
    }

    pub fn residues(self) -> impl Iterator<Item = u32> {
        0..self.0
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `[[a, b], [c, d]]` over F_ℓ. Invertibility is not an invariant of the type.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gl2Mat {
    a: u32,
    b: u32,
    c: u32,
    d: u32,
    m: PrimeModulus,
}

/// Where the eigenvalues of a 2×2 matrix live.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EigenStatus {
    /// Two distinct eigenvalues in F_ℓ, ascending.
    SplitDistinct(u32, u32),
    SplitRepeated(u32),
    NonSplit,
}

impl EigenStatus {
    pub fn is_split(self) -> bool {
        !matches!(self, EigenStatus::NonSplit)
    }

    pub fn eigenvalues(self) -> Option<(u32, u32)> {
        match self {
            EigenStatus::SplitDistinct(x, y) => Some((x, y)),
            EigenStatus::SplitRepeated(x) => Some((x, x)),
            EigenStatus::NonSplit => None,
        }
    }
}

/// Characteristic polynomial `X² − (tr M) X + det M` with its eigenvalue status.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gl2CharPoly {
    pub poly: Poly<i64>,
    pub eigen: EigenStatus,
}

impl Gl2Mat {
    pub fn new(m: PrimeModulus, entries: [i64; 4]) -> Self {
        let [a, b, c, d] = entries.map(|e| m.reduce(e));
        Gl2Mat { a, b, c, d, m }
    }

    pub(crate) fn from_residues(m: PrimeModulus, a: u32, b: u32, c: u32, d: u32) -> Self {
        debug_assert!(a < m.get() && b < m.get() && c < m.get() && d < m.get());
        Gl2Mat { a, b, c, d, m }
    }

    pub fn identity(m: PrimeModulus) -> Self {
        Gl2Mat::from_residues(m, 1, 0, 0, 1)
    }

    pub fn diag(m: PrimeModulus, x: i64, y: i64) -> Self {
        Gl2Mat::new(m, [x, 0, 0, y])
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.m
    }

    /// `[a, b, c, d]` in row-major order.
    pub fn entries(&self) -> [u32; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> u32 {
        let m = self.m;
        m.sub(m.mul(self.a, self.d), m.mul(self.b, self.c))
    }

    pub fn trace(&self) -> u32 {
        self.m.add(self.a, self.d)
    }

    pub fn is_invertible(&self) -> bool {
        self.det() != 0
    }

    pub fn mul(&self, o: &Gl2Mat) -> Gl2Mat {
        let m = self.m;
        debug_assert_eq!(m, o.m);
        Gl2Mat {
            a: m.add(m.mul(self.a, o.a), m.mul(self.b, o.c)),
            b: m.add(m.mul(self.a, o.b), m.mul(self.b, o.d)),
            c: m.add(m.mul(self.c, o.a), m.mul(self.d, o.c)),
            d: m.add(m.mul(self.c, o.b), m.mul(self.d, o.d)),
            m,
        }
    }

    pub fn scale(&self, s: u32) -> Gl2Mat {
        let m = self.m;
        Gl2Mat {
            a: m.mul(self.a, s),
            b: m.mul(self.b, s),
            c: m.mul(self.c, s),
            d: m.mul(self.d, s),
            m,
        }
    }

    pub fn inverse(&self) -> Option<Gl2Mat> {
        let m = self.m;
        let inv = m.inv(self.det())?;
        Some(Gl2Mat {
            a: m.mul(self.d, inv),
            b: m.mul(m.neg(self.b), inv),
            c: m.mul(m.neg(self.c), inv),
            d: m.mul(self.a, inv),
            m,
        })
    }

    /// `n · self · n⁻¹`; `n` must be invertible.
    pub fn conjugate_by(&self, n: &Gl2Mat) -> Gl2Mat {
        let n_inv = n.inverse().expect("conjugating matrix must be invertible");
        n.mul(self).mul(&n_inv)
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.c == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.b == 0 && self.c == 0
    }

    pub fn is_unipotent_upper(&self) -> bool {
        self.a == 1 && self.c == 0 && self.d == 1
    }

    pub fn is_scalar(&self) -> bool {
        self.is_diagonal() && self.a == self.d
    }

    /// Shape `[[a, ξb], [b, a]]` with `(a, b) ≠ (0, 0)`.
    pub fn is_nonsplit_cartan(&self, xi: u32) -> bool {
        self.a == self.d && self.b == self.m.mul(xi, self.c) && (self.a != 0 || self.c != 0)
    }

    /// Upper-triangular part with the off-diagonal entry cleared.
    pub fn diagonal_part(&self) -> Gl2Mat {
        Gl2Mat::from_residues(self.m, self.a, 0, 0, self.d)
    }

    pub fn char_poly(&self) -> Gl2CharPoly {
        let m = self.m;
        let tr = self.trace();
        let det = self.det();
        let poly = Poly::new(vec![det as i64, m.neg(tr) as i64, 1]);
        let disc = m.sub(m.mul(tr, tr), m.mul(4, det));
        let half = m.inv(2).expect("ell is odd");
        let eigen = if disc == 0 {
            EigenStatus::SplitRepeated(m.mul(tr, half))
        } else {
            match m.sqrt(disc) {
                Some(r) => {
                    let x = m.mul(m.add(tr, r), half);
                    let y = m.mul(m.sub(tr, r), half);
                    EigenStatus::SplitDistinct(x.min(y), x.max(y))
                }
                None => EigenStatus::NonSplit,
            }
        };
        Gl2CharPoly { poly, eigen }
    }
}

impl fmt::Debug for Gl2Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

impl fmt::Display for Gl2Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for Gl2Mat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries().serialize(s)
    }
}

/// Characteristic polynomial and eigenvalue status of a single matrix.
pub fn char_poly_gl2(m: &Gl2Mat) -> Gl2CharPoly {
    m.char_poly()
}

pub(crate) type Mats = SmallVec<[Gl2Mat; 4]>;

/// A g-tuple `(M_1, …, M_g)` over a common modulus.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GTuple {
    mats: Mats,
}

impl GTuple {
    pub fn new(mats: Vec<Gl2Mat>) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::malformed("a g-tuple needs at least one component"))?;
        if mats.iter().any(|m| m.modulus() != first.modulus()) {
            return Err(Error::malformed("g-tuple components have different moduli"));
        }
        Ok(GTuple {
            mats: mats.into_iter().collect(),
        })
    }

    pub(crate) fn from_mats(mats: Mats) -> Self {
        debug_assert!(!mats.is_empty());
        GTuple { mats }
    }

    pub fn identity(m: PrimeModulus, g: usize) -> Self {
        GTuple::from_mats(std::iter::repeat_n(Gl2Mat::identity(m), g).collect())
    }

    /// The same matrix in every component.
    pub fn repeated(mat: Gl2Mat, g: usize) -> Self {
        GTuple::from_mats(std::iter::repeat_n(mat, g).collect())
    }

    pub fn g(&self) -> usize {
        self.mats.len()
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.mats[0].modulus()
    }

    pub fn mats(&self) -> &[Gl2Mat] {
        &self.mats
    }

    pub fn mul(&self, o: &GTuple) -> GTuple {
        debug_assert_eq!(self.g(), o.g());
        GTuple::from_mats(
            self.mats
                .iter()
                .zip(&o.mats)
                .map(|(x, y)| x.mul(y))
                .collect(),
        )
    }

    pub fn inverse(&self) -> Option<GTuple> {
        let mats: Option<Mats> = self.mats.iter().map(Gl2Mat::inverse).collect();
        mats.map(GTuple::from_mats)
    }

    /// Componentwise `s · self · s⁻¹`; `s` must be invertible.
    pub fn conjugate_by(&self, s: &GTuple) -> GTuple {
        GTuple::from_mats(
            self.mats
                .iter()
                .zip(&s.mats)
                .map(|(x, n)| x.conjugate_by(n))
                .collect(),
        )
    }

    pub fn scale(&self, s: u32) -> GTuple {
        GTuple::from_mats(self.mats.iter().map(|x| x.scale(s)).collect())
    }

    pub fn trace_sum(&self) -> u32 {
        let m = self.modulus();
        self.mats.iter().fold(0, |acc, x| m.add(acc, x.trace()))
    }

    /// The common determinant, if all components share one.
    pub fn common_det(&self) -> Option<u32> {
        let d = self.mats[0].det();
        self.mats.iter().all(|x| x.det() == d).then_some(d)
    }

    pub fn all_invertible(&self) -> bool {
        self.mats.iter().all(Gl2Mat::is_invertible)
    }

    /// Every eigenvalue of every component lies in F_ℓ^×.
    pub fn all_eigenvalues_in_units(&self) -> bool {
        self.mats
            .iter()
            .all(|x| x.is_invertible() && x.char_poly().eigen.is_split())
    }

    pub fn diagonal_part(&self) -> GTuple {
        GTuple::from_mats(self.mats.iter().map(Gl2Mat::diagonal_part).collect())
    }
}

impl fmt::Debug for GTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.mats.iter()).finish()
    }
}

impl fmt::Display for GTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, m) in self.mats.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for GTuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.mats.as_slice().serialize(s)
    }
}

/// Product of the component characteristic polynomials, reduced mod ℓ.
pub fn char_poly_tuple(t: &GTuple) -> Poly<i64> {
    let ell = t.modulus().get() as i64;
    t.mats()
        .iter()
        .fold(Poly::one(), |acc, m| acc.mul_mod(&m.char_poly().poly, &ell))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(ell: u64) -> PrimeModulus {
        PrimeModulus::new(ell).unwrap()
    }

    #[test]
    fn modulus_rejects_composites_and_two() {
        assert!(PrimeModulus::new(2).is_err());
        assert!(PrimeModulus::new(9).is_err());
        assert!(PrimeModulus::new(1).is_err());
        assert_eq!(m(7).get(), 7);
    }

    #[test]
    fn char_poly_examples() {
        let p = char_poly_gl2(&Gl2Mat::diag(m(3), 1, 2));
        assert_eq!(p.poly.coeffs(), &[2, 0, 1]);
        assert_eq!(p.eigen, EigenStatus::SplitDistinct(1, 2));

        let p = char_poly_gl2(&Gl2Mat::identity(m(3)));
        assert_eq!(p.poly.coeffs(), &[1, 1, 1]); // X² − 2X + 1 = X² + X + 1 mod 3
        assert_eq!(p.eigen, EigenStatus::SplitRepeated(1));

        let p = char_poly_gl2(&Gl2Mat::new(m(3), [0, 2, 1, 0]));
        assert_eq!(p.poly.coeffs(), &[1, 0, 1]);
        assert_eq!(p.eigen, EigenStatus::NonSplit);
    }

    #[test]
    fn char_poly_works_for_singular_matrices() {
        let p = char_poly_gl2(&Gl2Mat::new(m(5), [1, 1, 1, 1]));
        assert_eq!(p.eigen, EigenStatus::SplitDistinct(0, 2));
    }

    #[test]
    fn tuple_char_poly_examples() {
        let ell = m(3);
        let t = GTuple::new(vec![Gl2Mat::diag(ell, 1, 2)]).unwrap();
        assert_eq!(char_poly_tuple(&t), char_poly_gl2(&t.mats()[0]).poly);

        let t = GTuple::new(vec![Gl2Mat::diag(ell, 1, 2), Gl2Mat::diag(ell, 2, 1)]).unwrap();
        assert_eq!(char_poly_tuple(&t).coeffs(), &[1, 0, 1, 0, 1]);

        let ell = m(5);
        let t = GTuple::identity(ell, 2);
        // (X − 1)^4 = X^4 − 4X^3 + 6X^2 − 4X + 1
        assert_eq!(char_poly_tuple(&t).coeffs(), &[1, 1, 1, 1, 1]);
    }

    #[test]
    fn tuple_rejects_mixed_moduli() {
        let err = GTuple::new(vec![Gl2Mat::identity(m(3)), Gl2Mat::identity(m(5))]);
        assert!(matches!(err, Err(Error::Malformed(_))));
        assert!(matches!(GTuple::new(vec![]), Err(Error::Malformed(_))));
    }

    #[test]
    fn inverse_round_trips() {
        let ell = m(7);
        for a in 0..7 {
            for d in 0..7 {
                let x = Gl2Mat::new(ell, [a, 3, 2, d]);
                if let Some(inv) = x.inverse() {
                    assert_eq!(x.mul(&inv), Gl2Mat::identity(ell));
                } else {
                    assert_eq!(x.det(), 0);
                }
            }
        }
    }
}
