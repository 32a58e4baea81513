//! The subgroups of GL₂(Z/ℓZ)^g and their enumeration.
//!
//! Every group handled here is a union over some "fiber" label `f` of
//! `L_f^g`, where `L_f` is a list of 2×2 matrices. For the common-determinant
//! groups the fiber is the determinant; for U′ it is the scalar. Enumerating
//! fiber by fiber avoids filtering the full product.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::matrix::{GTuple, Gl2Mat, Mats, PrimeModulus};
use crate::error::{Error, Result};

/// Default cap on the number of elements an enumeration may produce.
pub const DEFAULT_CAP: u128 = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SubgroupKind {
    /// GL₂(ℓ) itself, as 1-tuples regardless of g.
    Gl2,
    /// 𝔾(ℓ) = GL₂(ℓ)^g.
    FullProduct,
    /// Tuples in 𝔾(ℓ) with a common determinant.
    G,
    /// Upper-triangular tuples with a common determinant.
    B,
    /// Unipotent upper-triangular tuples.
    U,
    /// Scalar multiples of U.
    Uprime,
    /// Diagonal tuples with a common determinant.
    T,
    /// ℬ_GL₂(ℓ)^g, no determinant condition.
    BorelProduct,
    /// C^ns_ξ(ℓ)^g ∩ G(ℓ).
    NonSplitCartan { xi: u32 },
}

impl SubgroupKind {
    pub const ALL_SPLIT: [SubgroupKind; 8] = [
        SubgroupKind::Gl2,
        SubgroupKind::FullProduct,
        SubgroupKind::BorelProduct,
        SubgroupKind::G,
        SubgroupKind::B,
        SubgroupKind::U,
        SubgroupKind::Uprime,
        SubgroupKind::T,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SubgroupKind::Gl2 => "GL2",
            SubgroupKind::FullProduct => "GG",
            SubgroupKind::G => "G",
            SubgroupKind::B => "B",
            SubgroupKind::U => "U",
            SubgroupKind::Uprime => "Uprime",
            SubgroupKind::T => "T",
            SubgroupKind::BorelProduct => "BorelProduct",
            SubgroupKind::NonSplitCartan { .. } => "NonSplitCartan",
        }
    }

    /// Number of components the kind's elements carry for a given g.
    pub fn arity(&self, g: usize) -> usize {
        match self {
            SubgroupKind::Gl2 => 1,
            _ => g,
        }
    }
}

impl fmt::Display for SubgroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupKind::NonSplitCartan { xi } => write!(f, "NonSplitCartan(xi={xi})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for SubgroupKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "GL2" | "Gl2" => SubgroupKind::Gl2,
            "GG" | "FullProduct" => SubgroupKind::FullProduct,
            "G" => SubgroupKind::G,
            "B" => SubgroupKind::B,
            "U" => SubgroupKind::U,
            "Uprime" | "U'" => SubgroupKind::Uprime,
            "T" => SubgroupKind::T,
            "BorelProduct" => SubgroupKind::BorelProduct,
            _ => return Err(Error::malformed(format!("unknown subgroup kind `{s}`"))),
        })
    }
}

fn check_xi(ell: PrimeModulus, xi: u32) -> Result<()> {
    let r = xi % ell.get();
    if r == 0 || ell.is_square(r) {
        return Err(Error::domain(format!(
            "xi = {xi} is not a non-square modulo {ell}"
        )));
    }
    Ok(())
}

/// Whether `t` satisfies the defining shape of `kind`.
pub fn membership(t: &GTuple, kind: SubgroupKind) -> Result<bool> {
    let mats = t.mats();
    let common = || t.common_det().is_some_and(|d| d != 0);
    Ok(match kind {
        SubgroupKind::Gl2 => mats.len() == 1 && mats[0].is_invertible(),
        SubgroupKind::FullProduct => t.all_invertible(),
        SubgroupKind::G => common(),
        SubgroupKind::BorelProduct => mats
            .iter()
            .all(|m| m.is_upper_triangular() && m.is_invertible()),
        SubgroupKind::B => mats.iter().all(Gl2Mat::is_upper_triangular) && common(),
        SubgroupKind::U => mats.iter().all(Gl2Mat::is_unipotent_upper),
        SubgroupKind::Uprime => {
            let s = mats[0].entries()[0];
            s != 0
                && mats.iter().all(|m| {
                    let [a, _, c, d] = m.entries();
                    a == s && c == 0 && d == s
                })
        }
        SubgroupKind::T => mats.iter().all(Gl2Mat::is_diagonal) && common(),
        SubgroupKind::NonSplitCartan { xi } => {
            check_xi(t.modulus(), xi)?;
            let xi = xi % t.modulus().get();
            mats.iter().all(|m| m.is_nonsplit_cartan(xi)) && common()
        }
    })
}

fn checked_pow(base: u128, exp: usize) -> Result<u128> {
    base.checked_pow(exp as u32)
        .ok_or_else(|| Error::domain("group order overflows u128"))
}

/// Closed-form order of `kind` for the given ℓ and g.
pub fn group_order(kind: SubgroupKind, ell: PrimeModulus, g: usize) -> Result<u128> {
    if g == 0 {
        return Err(Error::domain("g must be at least 1"));
    }
    let l = ell.get() as u128;
    let ovf = || Error::domain("group order overflows u128");
    let mul = |a: u128, b: u128| a.checked_mul(b).ok_or_else(ovf);
    let gl2 = (l - 1) * l * (l * l - 1);
    Ok(match kind {
        SubgroupKind::Gl2 => gl2,
        SubgroupKind::FullProduct => checked_pow(gl2, g)?,
        SubgroupKind::BorelProduct => mul(checked_pow(l - 1, 2 * g)?, checked_pow(l, g)?)?,
        SubgroupKind::G => mul(l - 1, mul(checked_pow(l, g)?, checked_pow(l * l - 1, g)?)?)?,
        SubgroupKind::B => mul(checked_pow(l - 1, g + 1)?, checked_pow(l, g)?)?,
        SubgroupKind::U => checked_pow(l, g)?,
        SubgroupKind::Uprime => mul(l - 1, checked_pow(l, g)?)?,
        SubgroupKind::T => checked_pow(l - 1, g + 1)?,
        SubgroupKind::NonSplitCartan { xi } => {
            check_xi(ell, xi)?;
            mul(l * l - 1, checked_pow(l + 1, g - 1)?)?
        }
    })
}

/// All matrices of GL₂(ℓ), grouped by determinant (index = det).
fn gl2_by_det(ell: PrimeModulus, keep: impl Fn(&Gl2Mat) -> bool) -> Vec<Vec<Gl2Mat>> {
    let l = ell.get();
    let mut by_det = vec![Vec::new(); l as usize];
    for a in 0..l {
        for b in 0..l {
            for c in 0..l {
                for d in 0..l {
                    let m = Gl2Mat::from_residues(ell, a, b, c, d);
                    let det = m.det();
                    if det != 0 && keep(&m) {
                        by_det[det as usize].push(m);
                    }
                }
            }
        }
    }
    by_det
}

fn fibers(kind: SubgroupKind, ell: PrimeModulus) -> Result<Vec<Vec<Gl2Mat>>> {
    let l = ell.get();
    let nonzero = |by_det: Vec<Vec<Gl2Mat>>| by_det.into_iter().skip(1).collect::<Vec<_>>();
    Ok(match kind {
        SubgroupKind::Gl2 | SubgroupKind::FullProduct => {
            vec![gl2_by_det(ell, |_| true).concat()]
        }
        SubgroupKind::G => nonzero(gl2_by_det(ell, |_| true)),
        SubgroupKind::BorelProduct => {
            vec![gl2_by_det(ell, Gl2Mat::is_upper_triangular).concat()]
        }
        SubgroupKind::B => nonzero(gl2_by_det(ell, Gl2Mat::is_upper_triangular)),
        SubgroupKind::T => nonzero(gl2_by_det(ell, Gl2Mat::is_diagonal)),
        SubgroupKind::U => vec![(0..l)
            .map(|b| Gl2Mat::from_residues(ell, 1, b, 0, 1))
            .collect()],
        SubgroupKind::Uprime => ell
            .units()
            .map(|s| {
                (0..l)
                    .map(|b| Gl2Mat::from_residues(ell, s, ell.mul(s, b), 0, s))
                    .collect()
            })
            .collect(),
        SubgroupKind::NonSplitCartan { xi } => {
            check_xi(ell, xi)?;
            let xi = xi % l;
            nonzero(gl2_by_det(ell, |m| m.is_nonsplit_cartan(xi)))
        }
    })
}

/// Restartable stream over the elements of a subgroup; yields each element once.
#[derive(Clone, Debug)]
pub struct Enumeration {
    fibers: Vec<Vec<Gl2Mat>>,
    arity: usize,
    fiber: usize,
    odometer: Vec<usize>,
    remaining: u128,
}

impl Enumeration {
    fn new(fibers: Vec<Vec<Gl2Mat>>, arity: usize) -> Self {
        let remaining = fibers
            .iter()
            .map(|f| (f.len() as u128).pow(arity as u32))
            .sum();
        let mut e = Enumeration {
            fibers,
            arity,
            fiber: 0,
            odometer: vec![0; arity],
            remaining,
        };
        e.skip_empty_fibers();
        e
    }

    fn skip_empty_fibers(&mut self) {
        while self.fiber < self.fibers.len() && self.fibers[self.fiber].is_empty() {
            self.fiber += 1;
        }
    }

    pub fn len_hint(&self) -> u128 {
        self.remaining
    }
}

impl Iterator for Enumeration {
    type Item = GTuple;

    fn next(&mut self) -> Option<GTuple> {
        if self.fiber >= self.fibers.len() {
            return None;
        }
        let list = &self.fibers[self.fiber];
        let item: Mats = self.odometer.iter().map(|&i| list[i]).collect();
        self.remaining -= 1;

        let mut pos = 0;
        loop {
            if pos == self.arity {
                self.odometer.iter_mut().for_each(|i| *i = 0);
                self.fiber += 1;
                self.skip_empty_fibers();
                break;
            }
            self.odometer[pos] += 1;
            if self.odometer[pos] < list.len() {
                break;
            }
            self.odometer[pos] = 0;
            pos += 1;
        }
        Some(GTuple::from_mats(item))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, usize::try_from(self.remaining).ok())
    }
}

/// Enumerates `kind` after checking its closed-form order against `cap`.
pub fn enumerate(
    kind: SubgroupKind,
    ell: PrimeModulus,
    g: usize,
    cap: u128,
) -> Result<Enumeration> {
    let order = group_order(kind, ell, g)?;
    if order > cap {
        return Err(Error::SizeGuard { order, cap });
    }
    Ok(Enumeration::new(fibers(kind, ell)?, kind.arity(g)))
}

/// A generating set for `kind` (only the groups used in conjugation checks).
///
/// G(ℓ): elementary unipotents in each component (they generate SL₂(ℓ)^g)
/// plus the tuple with `diag(ω, 1)` everywhere, ω a primitive root.
/// B(ℓ): upper elementary unipotents, `diag(ω, ω⁻¹)` per component, and the
/// same all-component `diag(ω, 1)`. T(ℓ): the diagonal generators of B.
pub fn generators(kind: SubgroupKind, ell: PrimeModulus, g: usize) -> Result<Vec<GTuple>> {
    let omega = crate::arith::primitive_root(ell.get() as u64) as u32;
    let omega_inv = ell.inv(omega).expect("primitive root is a unit");
    let id = Gl2Mat::identity(ell);
    let in_slot = |i: usize, m: Gl2Mat| {
        let mut mats: Mats = std::iter::repeat_n(id, g).collect();
        mats[i] = m;
        GTuple::from_mats(mats)
    };
    let upper = Gl2Mat::from_residues(ell, 1, 1, 0, 1);
    let lower = Gl2Mat::from_residues(ell, 1, 0, 1, 1);
    let torus_sl = Gl2Mat::from_residues(ell, omega, 0, 0, omega_inv);
    let det_shift = GTuple::repeated(Gl2Mat::from_residues(ell, omega, 0, 0, 1), g);

    let mut gens = Vec::new();
    match kind {
        SubgroupKind::G => {
            for i in 0..g {
                gens.push(in_slot(i, upper));
                gens.push(in_slot(i, lower));
            }
            gens.push(det_shift);
        }
        SubgroupKind::B => {
            for i in 0..g {
                gens.push(in_slot(i, upper));
                gens.push(in_slot(i, torus_sl));
            }
            gens.push(det_shift);
        }
        SubgroupKind::T => {
            for i in 0..g {
                gens.push(in_slot(i, torus_sl));
            }
            gens.push(det_shift);
        }
        other => {
            return Err(Error::InvalidVariant(format!(
                "no generating set implemented for {other}"
            )))
        }
    }
    Ok(gens)
}
