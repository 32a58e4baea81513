use super::matrix::{EigenStatus, Gl2Mat};
use crate::error::{Error, Result};

/// Finds `N` with `det N = 1` such that `N · m · N⁻¹` is upper-triangular.
///
/// Takes an eigenvector for the smaller eigenvalue as the first basis vector,
/// completes it with a standard basis vector, then rescales the first row of
/// the change of basis so the determinant becomes 1.
pub fn borel_conjugator(m: &Gl2Mat) -> Result<Gl2Mat> {
    let ell = m.modulus();
    if !m.is_invertible() {
        return Err(Error::domain(format!("{m} is not invertible mod {ell}")));
    }
    if m.is_upper_triangular() {
        return Ok(Gl2Mat::identity(ell));
    }
    let lambda = match m.char_poly().eigen {
        EigenStatus::SplitDistinct(x, _) | EigenStatus::SplitRepeated(x) => x,
        EigenStatus::NonSplit => {
            return Err(Error::domain(format!(
                "{m} has a non-split characteristic polynomial mod {ell}"
            )))
        }
    };
    let [a, b, c, d] = m.entries();
    // m is not upper-triangular, so c ≠ 0 and the second row of m − λI,
    // (c, d − λ), is nonzero; v = (λ − d, c) spans its kernel.
    let v = (ell.sub(lambda, d), c);
    debug_assert_eq!(
        ell.add(ell.mul(ell.sub(a, lambda), v.0), ell.mul(b, v.1)),
        0
    );
    // Columns (v, e1): determinant −c ≠ 0.
    let p = Gl2Mat::from_residues(ell, v.0, 1, v.1, 0);
    let n = p.inverse().expect("basis matrix is invertible");
    let det_inv = ell.inv(n.det()).expect("unit determinant");
    let rescale = Gl2Mat::from_residues(ell, det_inv, 0, 0, 1);
    Ok(rescale.mul(&n))
}
