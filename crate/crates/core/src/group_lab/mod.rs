//! Finite groups of 2×2 matrices over F_ℓ, the conjugacy sets attached to a
//! trace target, and exhaustive verifiers for their structural properties.

mod borel;
mod conj;
mod matrix;
mod subgroup;
mod verify;

pub use borel::borel_conjugator;
pub use conj::{
    conj_set, coset_rep_mod_u, coset_rep_mod_uprime, residues_in_range, ConjSet, ConjSetKind,
    GroupLab, Representation,
};
pub use matrix::{
    char_poly_gl2, char_poly_tuple, EigenStatus, GTuple, Gl2CharPoly, Gl2Mat, PrimeModulus,
};
pub use subgroup::{
    enumerate, generators, group_order, membership, Enumeration, SubgroupKind, DEFAULT_CAP,
};
pub use verify::{verify_lemma, verify_with, CheckOutcome, LemmaId, LemmaParams, LemmaReport};
