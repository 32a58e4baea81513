use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith;
use crate::error::{Error, Result};

/// A long Weierstrass model `y² + a1·xy + a3·y = x³ + a2·x² + a4·x + a6` over Z.
///
/// The discriminant is computed once on construction and is nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Curve {
    label: String,
    coeffs: [i64; 5],
    #[serde(serialize_with = "serialize_bigint")]
    disc: BigInt,
}

fn serialize_bigint<S: serde::Serializer>(
    v: &BigInt,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// The b- and c-invariants of a model, as exact integers.
struct Invariants {
    b2: BigInt,
    b4: BigInt,
    b6: BigInt,
    b8: BigInt,
}

impl Invariants {
    fn of(coeffs: &[i64; 5]) -> Self {
        let [a1, a2, a3, a4, a6] = coeffs.map(BigInt::from);
        Invariants {
            b2: &a1 * &a1 + 4 * &a2,
            b4: 2 * &a4 + &a1 * &a3,
            b6: &a3 * &a3 + 4 * &a6,
            b8: &a1 * &a1 * &a6 + 4 * &a2 * &a6 - &a1 * &a3 * &a4 + &a2 * &a3 * &a3 - &a4 * &a4,
        }
    }

    fn discriminant(&self) -> BigInt {
        let Invariants { b2, b4, b6, b8 } = self;
        -(b2 * b2 * b8) - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    }
}

impl Curve {
    /// `coeffs` is `[a1, a2, a3, a4, a6]`.
    pub fn new(label: impl Into<String>, coeffs: [i64; 5]) -> Result<Self> {
        let label = label.into();
        let disc = Invariants::of(&coeffs).discriminant();
        if disc.is_zero() {
            return Err(Error::SingularModel(label));
        }
        Ok(Curve {
            label,
            coeffs,
            disc,
        })
    }

    /// Short model `y² = x³ + a4·x + a6`.
    pub fn short(label: impl Into<String>, a4: i64, a6: i64) -> Result<Self> {
        Curve::new(label, [0, 0, 0, a4, a6])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `[a1, a2, a3, a4, a6]`.
    pub fn coeffs(&self) -> [i64; 5] {
        self.coeffs
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }

    /// `p ∤ Δ`. Primality of `p` is the caller's business.
    pub fn is_good(&self, p: u64) -> bool {
        match self.disc.to_i128() {
            Some(d) => d % p as i128 != 0,
            None => !(&self.disc % BigInt::from(p)).is_zero(),
        }
    }

    /// Distinct prime divisors of Δ, ascending.
    pub fn bad_primes(&self) -> Vec<BigUint> {
        arith::distinct_prime_factors(self.disc.magnitude())
    }

    /// Coefficients reduced into `[0, p)`.
    pub(crate) fn coeffs_mod(&self, p: u64) -> [u64; 5] {
        self.coeffs.map(|a| arith::reduce_i64(a, p))
    }

    /// `(A, B)` of the short model `y² = x³ − 27c4·x − 54c6`, reduced mod `p ≥ 5`.
    pub(crate) fn short_model_mod(&self, p: u64) -> (u64, u64) {
        debug_assert!(p >= 5);
        let [a1, a2, a3, a4, a6] = self.coeffs_mod(p);
        let (mul, add, sub) = (
            |x, y| arith::mul_mod(x, y, p),
            |x, y| arith::add_mod(x, y, p),
            |x, y| arith::sub_mod(x, y, p),
        );
        let c = |k: u64| k % p;
        let b2 = add(mul(a1, a1), mul(c(4), a2));
        let b4 = add(mul(c(2), a4), mul(a1, a3));
        let b6 = add(mul(a3, a3), mul(c(4), a6));
        let c4 = sub(mul(b2, b2), mul(c(24), b4));
        let c6 = sub(
            add(sub(0, mul(mul(b2, b2), b2)), mul(c(36), mul(b2, b4))),
            mul(c(216), b6),
        );
        (sub(0, mul(c(27), c4)), sub(0, mul(c(54), c6)))
    }

    /// `|Δ|` as a float, for the conductor surrogate.
    pub fn abs_discriminant_f64(&self) -> f64 {
        self.disc.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, a3, a4, a6] = self.coeffs;
        write!(f, "{}: {a1},{a2},{a3},{a4},{a6}", self.label)
    }
}

impl FromStr for Curve {
    type Err = Error;

    /// Parses one catalog line `label: a1,a2,a3,a4,a6`.
    fn from_str(line: &str) -> Result<Self> {
        let (label, rest) = line.split_once(':').ok_or_else(|| {
            Error::malformed(format!("expected `label: a1,a2,a3,a4,a6`, got `{line}`"))
        })?;
        let label = label.trim();
        if label.is_empty() {
            return Err(Error::malformed(format!("empty curve label in `{line}`")));
        }
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(Error::malformed(format!(
                "curve `{label}` needs 5 coefficients, got {}",
                parts.len()
            )));
        }
        let mut coeffs = [0i64; 5];
        for (slot, s) in coeffs.iter_mut().zip(&parts) {
            *slot = s
                .parse()
                .map_err(|_| Error::malformed(format!("curve `{label}`: bad coefficient `{s}`")))?;
        }
        Curve::new(label, coeffs)
    }
}

/// Discriminant and its distinct prime divisors.
pub fn discriminant_and_bad_primes(c: &Curve) -> (BigInt, Vec<BigUint>) {
    (c.discriminant().clone(), c.bad_primes())
}

/// Parses a catalog: one curve per line; blank lines and `#` comments are skipped.
pub fn parse_catalog(text: &str) -> Result<Vec<Curve>> {
    let mut curves = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let curve = line.parse::<Curve>().map_err(|e| match e {
            Error::Malformed(m) => Error::malformed(format!("line {}: {m}", n + 1)),
            other => other,
        })?;
        curves.push(curve);
    }
    Ok(curves)
}

pub fn read_catalog(path: impl AsRef<Path>) -> Result<Vec<Curve>> {
    parse_catalog(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discriminant_examples() {
        let c = Curve::short("a", 1, 1).unwrap();
        let (d, bad) = discriminant_and_bad_primes(&c);
        assert_eq!(d, BigInt::from(-496));
        assert_eq!(bad, vec![BigUint::from(2u32), BigUint::from(31u32)]);

        let c = Curve::short("cm", -1, 0).unwrap();
        assert_eq!(c.discriminant(), &BigInt::from(64));
        assert_eq!(c.bad_primes(), vec![BigUint::from(2u32)]);

        assert!(matches!(
            Curve::short("cusp", 0, 0),
            Err(Error::SingularModel(_))
        ));
    }

    #[test]
    fn long_model_discriminant() {
        // 11a3: y² + y = x³ − x², Δ = −11.
        let c = Curve::new("11a3", [0, -1, 1, 0, 0]).unwrap();
        assert_eq!(c.discriminant(), &BigInt::from(-11));
        // 37a1: y² + y = x³ − x, Δ = 37.
        let c = Curve::new("37a1", [0, 0, 1, -1, 0]).unwrap();
        assert_eq!(c.discriminant(), &BigInt::from(37));
    }

    #[test]
    fn catalog_round_trip() {
        let text = "# fixture\nE1: 0,0,0,1,1\n\nE2 : 0, 0, 0, 2, 3  # trailing\n";
        let curves = parse_catalog(text).unwrap();
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[1].label(), "E2");
        assert_eq!(curves[1].coeffs(), [0, 0, 0, 2, 3]);
        let again: Curve = curves[0].to_string().parse().unwrap();
        assert_eq!(again, curves[0]);
    }

    #[test]
    fn catalog_errors_name_the_line() {
        let err = parse_catalog("E1: 0,0,0,1,1\nE2: 0,0,1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse_catalog("E: 0,0,0,x,1").is_err());
        assert!(matches!(
            parse_catalog("E: 0,0,0,0,0"),
            Err(Error::SingularModel(_))
        ));
    }

    #[test]
    fn short_model_preserves_discriminant_class() {
        // The short model is a 6-scaling; it is nonsingular mod p iff the original is.
        let c = Curve::new("37a1", [0, 0, 1, -1, 0]).unwrap();
        for p in [5u64, 7, 11, 13, 37] {
            let (a, b) = c.short_model_mod(p);
            let d = (4 * arith::pow_mod(a, 3, p) + 27 * arith::mul_mod(b, b, p)) % p;
            assert_eq!(d == 0, !c.is_good(p), "p = {p}");
        }
    }
}
