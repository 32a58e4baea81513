//! The trace-condition conjugacy sets inside G(ℓ) and their images in the
//! quotients B/U and B/U′.

use std::cell::OnceCell;
use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::matrix::{GTuple, Gl2Mat, PrimeModulus};
use super::subgroup::{enumerate, membership, SubgroupKind, DEFAULT_CAP};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ConjSetKind {
    C {
        t: i64,
    },
    CBorel {
        t: i64,
    },
    CTorus {
        t: i64,
    },
    CHatBorel {
        t: i64,
    },
    /// Image in B/U′; only defined for t = 0.
    CHatPrimeBorel {
        t: i64,
    },
    CRange {
        z: f64,
    },
    CBorelRange {
        z: f64,
    },
    CHatBorelRange {
        z: f64,
    },
    CNs {
        xi: u32,
        t: i64,
    },
}

impl fmt::Display for ConjSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConjSetKind::C { t } => write!(f, "C(t={t})"),
            ConjSetKind::CBorel { t } => write!(f, "C_Borel(t={t})"),
            ConjSetKind::CTorus { t } => write!(f, "C_Torus(t={t})"),
            ConjSetKind::CHatBorel { t } => write!(f, "Chat_Borel(t={t})"),
            ConjSetKind::CHatPrimeBorel { t } => write!(f, "Chat'_Borel(t={t})"),
            ConjSetKind::CRange { z } => write!(f, "C(|t|<={z})"),
            ConjSetKind::CBorelRange { z } => write!(f, "C_Borel(|t|<={z})"),
            ConjSetKind::CHatBorelRange { z } => write!(f, "Chat_Borel(|t|<={z})"),
            ConjSetKind::CNs { xi, t } => write!(f, "C_ns(xi={xi},t={t})"),
        }
    }
}

/// How the members of a [`ConjSet`] are to be read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Representation {
    Elements,
    /// Canonical representatives of U(ℓ)-cosets: the diagonal part.
    CosetsModU,
    /// Canonical representatives of U′(ℓ)-cosets: the lexicographically least tuple.
    CosetsModUprime,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjSet {
    pub kind: ConjSetKind,
    pub representation: Representation,
    /// Sorted, without repetition.
    pub members: Vec<GTuple>,
}

impl ConjSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, t: &GTuple) -> bool {
        self.members.binary_search(t).is_ok()
    }
}

/// Canonical representative of `b · U(ℓ)` for `b ∈ B(ℓ)`.
pub fn coset_rep_mod_u(b: &GTuple) -> GTuple {
    b.diagonal_part()
}

/// Canonical representative of `b · U′(ℓ)` for `b ∈ B(ℓ)`: the
/// lexicographically least element of the coset.
///
/// The coset is `{ s·u·b }`, whose first entry ranges over `s·a₁` and whose
/// off-diagonal entries range over all of F_ℓ, so the least element has a
/// leading 1 and zero off-diagonal entries.
pub fn coset_rep_mod_uprime(b: &GTuple) -> GTuple {
    let ell = b.modulus();
    let s = ell
        .inv(b.mats()[0].entries()[0])
        .expect("Borel element has unit diagonal");
    b.diagonal_part().scale(s)
}

/// Integers t with |t| ≤ z, reduced mod ℓ and deduplicated.
pub fn residues_in_range(z: f64, ell: PrimeModulus) -> Result<BTreeSet<u32>> {
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::domain(format!("z must be a positive real, got {z}")));
    }
    let bound = z.floor() as i64;
    Ok((-bound..=bound).map(|t| ell.reduce(t)).collect())
}

/// Computation context for one (ℓ, g). Caches the split part of G(ℓ) bucketed
/// by the residue t with Σ tr ≡ −t, so repeated queries cost one enumeration.
pub struct GroupLab {
    ell: PrimeModulus,
    g: usize,
    cap: u128,
    split_by_t: OnceCell<Vec<Vec<GTuple>>>,
}

impl GroupLab {
    pub fn new(ell: u64, g: usize) -> Result<Self> {
        GroupLab::with_cap(ell, g, DEFAULT_CAP)
    }

    pub fn with_cap(ell: u64, g: usize, cap: u128) -> Result<Self> {
        if g == 0 {
            return Err(Error::domain("g must be at least 1"));
        }
        Ok(GroupLab {
            ell: PrimeModulus::new(ell)?,
            g,
            cap,
            split_by_t: OnceCell::new(),
        })
    }

    pub fn ell(&self) -> PrimeModulus {
        self.ell
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn cap(&self) -> u128 {
        self.cap
    }

    pub fn enumerate(&self, kind: SubgroupKind) -> Result<Vec<GTuple>> {
        Ok(enumerate(kind, self.ell, self.g, self.cap)?.collect())
    }

    fn split_buckets(&self) -> Result<&Vec<Vec<GTuple>>> {
        if let Some(b) = self.split_by_t.get() {
            return Ok(b);
        }
        let ell = self.ell;
        let mut buckets = vec![Vec::new(); ell.get() as usize];
        for t in enumerate(SubgroupKind::G, ell, self.g, self.cap)? {
            if t.all_eigenvalues_in_units() {
                let residue = ell.neg(t.trace_sum());
                buckets[residue as usize].push(t);
            }
        }
        for b in &mut buckets {
            b.sort();
        }
        Ok(self.split_by_t.get_or_init(|| buckets))
    }

    /// Whether `t` lies in C(ℓ, t_res), by the defining condition.
    pub fn in_c(&self, t: &GTuple, t_res: u32) -> bool {
        t.common_det().is_some_and(|d| d != 0)
            && t.all_eigenvalues_in_units()
            && self.ell.neg(t.trace_sum()) == t_res
    }

    /// C(ℓ, t) for a residue t.
    pub fn c(&self, t_res: u32) -> Result<&[GTuple]> {
        Ok(&self.split_buckets()?[t_res as usize])
    }

    pub fn c_borel(&self, t_res: u32) -> Result<Vec<GTuple>> {
        self.intersect(self.c(t_res)?, SubgroupKind::B)
    }

    pub fn c_torus(&self, t_res: u32) -> Result<Vec<GTuple>> {
        self.intersect(self.c(t_res)?, SubgroupKind::T)
    }

    fn intersect(&self, set: &[GTuple], kind: SubgroupKind) -> Result<Vec<GTuple>> {
        let mut out = Vec::new();
        for t in set {
            if membership(t, kind)? {
                out.push(t.clone());
            }
        }
        Ok(out)
    }

    /// Union of C(ℓ, t) over the residues of the integers |t| ≤ z.
    pub fn c_range(&self, z: f64) -> Result<Vec<GTuple>> {
        let mut out = Vec::new();
        for r in residues_in_range(z, self.ell)? {
            out.extend_from_slice(self.c(r)?);
        }
        out.sort();
        Ok(out)
    }

    pub fn c_borel_range(&self, z: f64) -> Result<Vec<GTuple>> {
        let range = self.c_range(z)?;
        self.intersect(&range, SubgroupKind::B)
    }

    pub fn c_ns(&self, xi: u32, t_res: u32) -> Result<Vec<GTuple>> {
        let ell = self.ell;
        let mut out: Vec<GTuple> =
            enumerate(SubgroupKind::NonSplitCartan { xi }, ell, self.g, self.cap)?
                .filter(|t| ell.neg(t.trace_sum()) == t_res)
                .collect();
        out.sort();
        Ok(out)
    }

    /// Builds the requested set. Integer targets t are reduced mod ℓ first.
    pub fn conj_set(&self, kind: ConjSetKind) -> Result<ConjSet> {
        let ell = self.ell;
        let image = |elements: Vec<GTuple>, rep: fn(&GTuple) -> GTuple| -> Vec<GTuple> {
            let set: BTreeSet<GTuple> = elements.iter().map(rep).collect();
            set.into_iter().collect()
        };
        let (representation, members) = match kind {
            ConjSetKind::C { t } => (Representation::Elements, self.c(ell.reduce(t))?.to_vec()),
            ConjSetKind::CBorel { t } => (Representation::Elements, self.c_borel(ell.reduce(t))?),
            ConjSetKind::CTorus { t } => (Representation::Elements, self.c_torus(ell.reduce(t))?),
            ConjSetKind::CHatBorel { t } => (
                Representation::CosetsModU,
                image(self.c_borel(ell.reduce(t))?, coset_rep_mod_u),
            ),
            ConjSetKind::CHatPrimeBorel { t } => {
                if t != 0 {
                    return Err(Error::InvalidVariant(format!(
                        "the U'-quotient image is only defined for t = 0, got t = {t}"
                    )));
                }
                (
                    Representation::CosetsModUprime,
                    image(self.c_borel(0)?, coset_rep_mod_uprime),
                )
            }
            ConjSetKind::CRange { z } => (Representation::Elements, self.c_range(z)?),
            ConjSetKind::CBorelRange { z } => (Representation::Elements, self.c_borel_range(z)?),
            ConjSetKind::CHatBorelRange { z } => (
                Representation::CosetsModU,
                image(self.c_borel_range(z)?, coset_rep_mod_u),
            ),
            ConjSetKind::CNs { xi, t } => (Representation::Elements, self.c_ns(xi, ell.reduce(t))?),
        };
        Ok(ConjSet {
            kind,
            representation,
            members,
        })
    }

    /// The witness tuple for C_Torus(ℓ, t) ≠ ∅: `diag(−t/(2g), −t/(2g))` for
    /// t ≢ 0 and `diag(1/(2g), −1/(2g))` for t ≡ 0. Requires ℓ ∤ 2g.
    pub fn torus_witness(&self, t_res: u32) -> Result<GTuple> {
        let ell = self.ell;
        let two_g = ell.reduce(2 * self.g as i64);
        let inv = ell
            .inv(two_g)
            .ok_or_else(|| Error::domain(format!("ell = {ell} divides 2g = {}", 2 * self.g)))?;
        let mat = if t_res == 0 {
            Gl2Mat::from_residues(ell, inv, 0, 0, ell.neg(inv))
        } else {
            let v = ell.mul(ell.neg(t_res), inv);
            Gl2Mat::from_residues(ell, v, 0, 0, v)
        };
        Ok(GTuple::repeated(mat, self.g))
    }
}

/// One-shot form of [`GroupLab::conj_set`].
pub fn conj_set(kind: ConjSetKind, ell: u64, g: usize) -> Result<ConjSet> {
    GroupLab::new(ell, g)?.conj_set(kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_zero_mod_three() {
        let set = conj_set(ConjSetKind::CTorus { t: 0 }, 3, 1).unwrap();
        let ell = PrimeModulus::new(3).unwrap();
        let expect = vec![
            GTuple::repeated(Gl2Mat::diag(ell, 1, 2), 1),
            GTuple::repeated(Gl2Mat::diag(ell, 2, 1), 1),
        ];
        assert_eq!(set.members, expect);
    }

    #[test]
    fn small_set_sizes() {
        assert_eq!(conj_set(ConjSetKind::C { t: 0 }, 3, 1).unwrap().len(), 12);
        assert_eq!(
            conj_set(ConjSetKind::CBorel { t: 0 }, 3, 1).unwrap().len(),
            6
        );
    }

    #[test]
    fn t_is_reduced_on_entry() {
        let lab = GroupLab::new(5, 1).unwrap();
        let a = lab.conj_set(ConjSetKind::CTorus { t: -2 }).unwrap();
        let b = lab.conj_set(ConjSetKind::CTorus { t: 3 }).unwrap();
        assert_eq!(a.members, b.members);
    }

    #[test]
    fn hat_prime_only_at_zero() {
        let lab = GroupLab::new(5, 1).unwrap();
        assert!(matches!(
            lab.conj_set(ConjSetKind::CHatPrimeBorel { t: 1 }),
            Err(Error::InvalidVariant(_))
        ));
        assert!(lab.conj_set(ConjSetKind::CHatPrimeBorel { t: 0 }).is_ok());
    }

    #[test]
    fn uprime_rep_is_least_in_coset() {
        // Oracle: materialize each coset s·u·b and take its minimum.
        let lab = GroupLab::new(5, 2).unwrap();
        let uprime = lab.enumerate(SubgroupKind::Uprime).unwrap();
        for b in lab.enumerate(SubgroupKind::B).unwrap().iter().step_by(7) {
            let least = uprime.iter().map(|x| x.mul(b)).min().unwrap();
            assert_eq!(coset_rep_mod_uprime(b), least, "{b}");
        }
    }

    #[test]
    fn u_rep_matches_torus_element_of_coset() {
        let lab = GroupLab::new(3, 2).unwrap();
        let u = lab.enumerate(SubgroupKind::U).unwrap();
        for b in lab.enumerate(SubgroupKind::B).unwrap() {
            let in_torus: Vec<_> = u
                .iter()
                .map(|x| x.mul(&b))
                .filter(|x| membership(x, SubgroupKind::T).unwrap())
                .collect();
            assert_eq!(in_torus, vec![coset_rep_mod_u(&b)]);
        }
    }

    #[test]
    fn range_collapses_residues() {
        let ell = PrimeModulus::new(3).unwrap();
        assert_eq!(residues_in_range(1.0, ell).unwrap().len(), 3);
        assert_eq!(residues_in_range(0.5, ell).unwrap().len(), 1);
        assert!(residues_in_range(0.0, ell).is_err());
        let lab = GroupLab::new(3, 1).unwrap();
        let all: usize = (0..3).map(|t| lab.c(t).unwrap().len()).sum();
        assert_eq!(lab.c_range(1.0).unwrap().len(), all);
    }

    #[test]
    fn nonsplit_set_has_constant_trace() {
        let lab = GroupLab::new(5, 2).unwrap();
        let set = lab.conj_set(ConjSetKind::CNs { xi: 2, t: 1 }).unwrap();
        assert!(!set.is_empty());
        for t in &set.members {
            assert_eq!(lab.ell().neg(t.trace_sum()), 1);
            assert!(membership(t, SubgroupKind::NonSplitCartan { xi: 2 }).unwrap());
        }
    }

    #[test]
    fn witness_lands_in_torus_set() {
        let lab = GroupLab::new(5, 1).unwrap();
        let w = lab.torus_witness(0).unwrap();
        assert_eq!(w, GTuple::repeated(Gl2Mat::diag(lab.ell(), 3, 2), 1));
        for t in 0..5 {
            let w = lab.torus_witness(t).unwrap();
            assert!(lab.c_torus(t).unwrap().contains(&w));
        }
        assert!(GroupLab::new(3, 3).unwrap().torus_witness(0).is_err());
    }
}
