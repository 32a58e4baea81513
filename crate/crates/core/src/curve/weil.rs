use num_bigint::BigInt;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Integer Weil polynomial with exact coefficients.
pub type WeilPoly = Poly<BigInt>;

/// `X² − a·X + p`.
pub fn weil_poly(a_p: i64, p: u64) -> WeilPoly {
    Poly::new(vec![BigInt::from(p), BigInt::from(-a_p), BigInt::from(1)])
}

fn check_modulus(p: u64, m: u64) -> Result<BigInt> {
    if m == 0 || p.gcd(&m) != 1 {
        return Err(Error::domain(format!(
            "modulus {m} is not coprime to p = {p}"
        )));
    }
    Ok(BigInt::from(m))
}

/// `X² − a·X + p` with coefficients reduced into `[0, m)`.
pub fn weil_poly_mod(a_p: i64, p: u64, m: u64) -> Result<WeilPoly> {
    let m = check_modulus(p, m)?;
    Ok(weil_poly(a_p, p).reduce_mod(&m))
}

/// Product of the Weil polynomials of `(a_p, p)` pairs sharing one `p`.
pub fn product_weil_poly(records: &[(i64, u64)]) -> Result<WeilPoly> {
    let p = common_prime(records)?;
    Ok(Poly::product(
        records
            .iter()
            .map(|&(a, _)| weil_poly(a, p))
            .collect::<Vec<_>>()
            .iter(),
    ))
}

/// Same product computed factor by factor mod `m`.
pub fn product_weil_poly_mod(records: &[(i64, u64)], m: u64) -> Result<WeilPoly> {
    let p = common_prime(records)?;
    let mb = check_modulus(p, m)?;
    records
        .iter()
        .try_fold(Poly::one().reduce_mod(&mb), |acc, &(a, _)| {
            Ok(acc.mul_mod(&weil_poly_mod(a, p, m)?, &mb))
        })
}

fn common_prime(records: &[(i64, u64)]) -> Result<u64> {
    let (_, p) = *records
        .first()
        .ok_or_else(|| Error::domain("product of an empty family of Weil polynomials"))?;
    if let Some((_, q)) = records.iter().find(|(_, q)| *q != p) {
        return Err(Error::domain(format!("records mix p = {p} and p = {q}")));
    }
    Ok(p)
}

/// Coefficient of `X^{2g−1}` in a degree-2g Weil polynomial.
pub fn a1p_coefficient(poly: &WeilPoly) -> Option<BigInt> {
    let deg = poly.degree()?;
    (deg >= 1).then(|| poly.coeff(deg - 1))
}

/// `a² − 4p`.
pub fn frobenius_disc(a_p: i64, p: u64) -> i128 {
    (a_p as i128) * (a_p as i128) - 4 * p as i128
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(p: &WeilPoly) -> Vec<i64> {
        p.coeffs()
            .iter()
            .map(|c| i64::try_from(c).unwrap())
            .collect()
    }

    #[test]
    fn single_factor() {
        assert_eq!(ints(&weil_poly(-3, 5)), vec![5, 3, 1]);
        assert_eq!(ints(&weil_poly_mod(-3, 5, 3).unwrap()), vec![2, 0, 1]);
        assert!(matches!(weil_poly_mod(0, 7, 7), Err(Error::Domain(_))));
    }

    #[test]
    fn product_examples() {
        let prod = product_weil_poly(&[(-3, 5), (3, 5)]).unwrap();
        assert_eq!(ints(&prod), vec![25, 0, 1, 0, 1]);
        assert_eq!(a1p_coefficient(&prod), Some(BigInt::from(0)));
        assert_eq!(product_weil_poly(&[(-3, 5)]).unwrap(), weil_poly(-3, 5));
        assert!(matches!(
            product_weil_poly(&[(-3, 5), (3, 7)]),
            Err(Error::Domain(_))
        ));
        assert!(product_weil_poly(&[]).is_err());
    }

    #[test]
    fn discriminants() {
        assert_eq!(frobenius_disc(-3, 5), -11);
        assert_eq!(frobenius_disc(0, 7), -28);
        assert_eq!(frobenius_disc(3, 7), -19);
    }
}
