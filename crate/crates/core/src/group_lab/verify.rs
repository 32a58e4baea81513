//! Exhaustive verification of the structural facts about B, U, U′, T and the
//! conjugacy sets C(ℓ, t), producing machine-readable reports.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::borel::borel_conjugator;
use super::conj::{coset_rep_mod_u, coset_rep_mod_uprime, residues_in_range, GroupLab};
use super::matrix::GTuple;
use super::subgroup::{generators, group_order, membership, SubgroupKind};
use crate::error::{Error, Result};

/// Beyond this many element pairs, conjugation and commutator checks switch
/// from the whole group to a generating set.
const PAIR_LIMIT: u128 = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum LemmaId {
    /// U, U′ normal in B with abelian quotients.
    L4_1,
    /// T(ℓ) → B(ℓ)/U(ℓ) is a bijection.
    L4_3,
    /// Non-emptiness, conjugation closure, and U/U′-closure of the C-sets.
    L5_1,
    /// Every G(ℓ)-class in C(ℓ, t) meets B(ℓ).
    L5_3,
    /// Cardinality relations and bounds for the C-sets.
    L5_4,
    /// Group-theoretic hypotheses of the Chebotarev reduction for (G, B, U) and (G, B, U′).
    C2_2Hyp,
}

impl LemmaId {
    pub const ALL: [LemmaId; 6] = [
        LemmaId::L4_1,
        LemmaId::L4_3,
        LemmaId::L5_1,
        LemmaId::L5_3,
        LemmaId::L5_4,
        LemmaId::C2_2Hyp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LemmaId::L4_1 => "L4.1",
            LemmaId::L4_3 => "L4.3",
            LemmaId::L5_1 => "L5.1",
            LemmaId::L5_3 => "L5.3",
            LemmaId::L5_4 => "L5.4",
            LemmaId::C2_2Hyp => "C2.2-hyp",
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LemmaId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::malformed(format!("unknown lemma id `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct LemmaParams {
    pub t: Option<i64>,
    pub z: Option<f64>,
    pub xi: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    pub ell: u32,
    pub g: usize,
    pub params: LemmaParams,
    pub pass: bool,
    pub cardinalities: BTreeMap<String, u128>,
    pub checks: Vec<CheckOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
    pub notes: Vec<String>,
}

struct Recorder {
    cardinalities: BTreeMap<String, u128>,
    checks: Vec<CheckOutcome>,
    counterexample: Option<String>,
    notes: Vec<String>,
}

impl Recorder {
    fn new() -> Self {
        Recorder {
            cardinalities: BTreeMap::new(),
            checks: Vec::new(),
            counterexample: None,
            notes: vec!["verification restricted to ell not dividing 2g".into()],
        }
    }

    fn card(&mut self, name: impl Into<String>, n: impl TryInto<u128>) {
        self.cardinalities
            .insert(name.into(), n.try_into().unwrap_or(u128::MAX));
    }

    /// Records a check; `witness` is the counterexample if it failed.
    fn check(&mut self, name: impl Into<String>, witness: Option<String>) {
        let name = name.into();
        let pass = witness.is_none();
        if let (Some(w), None) = (witness, &self.counterexample) {
            self.counterexample = Some(format!("{name}: {w}"));
        }
        self.checks.push(CheckOutcome { name, pass });
    }

    fn holds(&mut self, name: impl Into<String>, ok: bool, detail: impl FnOnce() -> String) {
        self.check(name, (!ok).then(detail));
    }

    fn finish(self, lemma: LemmaId, lab: &GroupLab, params: LemmaParams) -> LemmaReport {
        LemmaReport {
            lemma,
            ell: lab.ell().get(),
            g: lab.g(),
            params,
            pass: self.checks.iter().all(|c| c.pass),
            cardinalities: self.cardinalities,
            checks: self.checks,
            counterexample: self.counterexample,
            notes: self.notes,
        }
    }
}

fn as_set(v: &[GTuple]) -> HashSet<&GTuple> {
    v.iter().collect()
}

/// `n · x · n⁻¹ ∈ sub` for all `n ∈ conj`, `x ∈ sub`.
fn normality_violation(sub: &[GTuple], conj: &[GTuple]) -> Option<String> {
    let members = as_set(sub);
    for n in conj {
        for x in sub {
            let y = x.conjugate_by(n);
            if !members.contains(&y) {
                return Some(format!("{n} . {x} . {n}^-1 = {y}"));
            }
        }
    }
    None
}

/// All commutators `[a, b]` of `elems` lie in `sub`.
fn commutator_violation(elems: &[GTuple], sub: &[GTuple]) -> Option<String> {
    let members = as_set(sub);
    let inverses: Vec<GTuple> = elems
        .iter()
        .map(|x| x.inverse().expect("group element"))
        .collect();
    for (a, a_inv) in elems.iter().zip(&inverses) {
        for (b, b_inv) in elems.iter().zip(&inverses) {
            let c = a.mul(b).mul(a_inv).mul(b_inv);
            if !members.contains(&c) {
                return Some(format!("[{a}, {b}] = {c}"));
            }
        }
    }
    None
}

/// `conj` acts on `set` by conjugation without leaving it.
fn conjugation_violation(set: &[GTuple], conj: &[GTuple]) -> Option<String> {
    normality_violation(set, conj)
}

/// `n · x ∈ set` for all `n ∈ left`, `x ∈ set`.
fn left_mult_violation(set: &[GTuple], left: &[GTuple]) -> Option<String> {
    let members = as_set(set);
    for n in left {
        for x in set {
            let y = n.mul(x);
            if !members.contains(&y) {
                return Some(format!("{n} . {x} = {y}"));
            }
        }
    }
    None
}

fn subset_violation(sub: &[GTuple], sup: &[GTuple]) -> Option<String> {
    let sup = as_set(sup);
    sub.iter()
        .find(|x| !sup.contains(x))
        .map(|x| format!("{x}"))
}

/// Either the whole group, or its generators when `|set| · |group|` is too large.
fn acting_set(
    lab: &GroupLab,
    kind: SubgroupKind,
    set_len: usize,
    rec: &mut Recorder,
) -> Result<Vec<GTuple>> {
    let order = group_order(kind, lab.ell(), lab.g())?;
    if order.saturating_mul(set_len as u128) <= PAIR_LIMIT {
        lab.enumerate(kind)
    } else {
        rec.notes
            .push(format!("{kind}-action checked on a generating set"));
        generators(kind, lab.ell(), lab.g())
    }
}

fn check_ell_coprime_2g(lab: &GroupLab) -> Result<()> {
    if (2 * lab.g()).is_multiple_of(lab.ell().get() as usize) {
        return Err(Error::domain(format!(
            "verification requires ell not dividing 2g (ell = {}, g = {})",
            lab.ell(),
            lab.g()
        )));
    }
    Ok(())
}

fn require_t(params: &LemmaParams, lemma: LemmaId) -> Result<i64> {
    params
        .t
        .ok_or_else(|| Error::malformed(format!("{lemma} needs a target t")))
}

/// Runs one verifier on an existing lab.
pub fn verify_with(lab: &GroupLab, lemma: LemmaId, params: LemmaParams) -> Result<LemmaReport> {
    check_ell_coprime_2g(lab)?;
    let mut rec = Recorder::new();
    match lemma {
        LemmaId::L4_1 => verify_normality(lab, &mut rec)?,
        LemmaId::L4_3 => verify_quotient_iso(lab, &mut rec)?,
        LemmaId::L5_1 => {
            verify_set_properties(lab, require_t(&params, lemma)?, params.z, &mut rec)?
        }
        LemmaId::L5_3 => {
            verify_classes_meet_borel(lab, require_t(&params, lemma)?, params.z, &mut rec)?
        }
        LemmaId::L5_4 => verify_cardinalities(lab, require_t(&params, lemma)?, params.z, &mut rec)?,
        LemmaId::C2_2Hyp => verify_chebotarev_hypotheses(lab, params.t.unwrap_or(0), &mut rec)?,
    }
    Ok(rec.finish(lemma, lab, params))
}

/// One-shot verifier with the default size guard.
pub fn verify_lemma(
    lemma: LemmaId,
    ell: u64,
    g: usize,
    params: LemmaParams,
) -> Result<LemmaReport> {
    let lab = GroupLab::new(ell, g)?;
    verify_with(&lab, lemma, params)
}

fn verify_normality(lab: &GroupLab, rec: &mut Recorder) -> Result<()> {
    let b = lab.enumerate(SubgroupKind::B)?;
    let u = lab.enumerate(SubgroupKind::U)?;
    let up = lab.enumerate(SubgroupKind::Uprime)?;
    rec.card("B", b.len());
    rec.card("U", u.len());
    rec.card("Uprime", up.len());

    rec.check("U subset Uprime", subset_violation(&u, &up));
    rec.check("Uprime subset B", subset_violation(&up, &b));
    let b_act = acting_set(lab, SubgroupKind::B, up.len(), rec)?;
    rec.check("U normal in B", normality_violation(&u, &b_act));
    rec.check("Uprime normal in B", normality_violation(&up, &b_act));

    let pairs = (b.len() as u128).pow(2);
    let commuting = if pairs <= PAIR_LIMIT {
        b.clone()
    } else {
        rec.notes
            .push("commutators taken over a generating set of B".into());
        generators(SubgroupKind::B, lab.ell(), lab.g())?
    };
    rec.check("B/U abelian", commutator_violation(&commuting, &u));
    rec.check("B/Uprime abelian", commutator_violation(&commuting, &up));
    Ok(())
}

fn verify_quotient_iso(lab: &GroupLab, rec: &mut Recorder) -> Result<()> {
    let b = lab.enumerate(SubgroupKind::B)?;
    let u = lab.enumerate(SubgroupKind::U)?;
    let t = lab.enumerate(SubgroupKind::T)?;

    // Coset oracle: label each b·U by its least element, computed directly.
    let coset_key = |x: &GTuple| u.iter().map(|n| x.mul(n)).min().expect("U is nonempty");
    let cosets: HashSet<GTuple> = b.iter().map(coset_key).collect();
    rec.card("B/U", cosets.len());
    rec.card("T", t.len());

    let ell = lab.ell();
    let identity = GTuple::identity(ell, lab.g());
    let t_set = as_set(&t);
    let kernel: Vec<&GTuple> = u.iter().filter(|x| t_set.contains(x)).collect();
    rec.card("T cap U", kernel.len());
    rec.holds("T cap U trivial", kernel == vec![&identity], || {
        format!("{kernel:?}")
    });

    let images: HashSet<GTuple> = t.iter().map(coset_key).collect();
    rec.holds("T -> B/U injective", images.len() == t.len(), || {
        format!("{} torus elements hit {} cosets", t.len(), images.len())
    });
    rec.holds("T -> B/U surjective", images == cosets, || {
        format!("{} cosets, {} hit", cosets.len(), images.len())
    });
    let closed_form = group_order(SubgroupKind::T, ell, lab.g())?;
    rec.holds(
        "|B/U| = (ell-1)^(g+1)",
        cosets.len() as u128 == closed_form,
        || format!("{} vs {closed_form}", cosets.len()),
    );
    Ok(())
}

fn verify_set_properties(lab: &GroupLab, t: i64, z: Option<f64>, rec: &mut Recorder) -> Result<()> {
    let ell = lab.ell();
    let r = ell.reduce(t);
    let c = lab.c(r)?;
    let cb = lab.c_borel(r)?;
    let ct = lab.c_torus(r)?;
    rec.card("C", c.len());
    rec.card("C_Borel", cb.len());
    rec.card("C_Torus", ct.len());

    // (i)
    let witness = lab.torus_witness(r)?;
    rec.holds("witness in C_Torus", ct.contains(&witness), || {
        format!("{witness}")
    });
    rec.check("C_Torus subset C_Borel", subset_violation(&ct, &cb));
    rec.check("C_Borel subset C", subset_violation(&cb, c));
    let def_violation = c.iter().find(|x| !lab.in_c(x, r)).map(|x| format!("{x}"));
    rec.check("C satisfies its definition", def_violation);

    // (ii)–(iv)
    let g_act = acting_set(lab, SubgroupKind::G, c.len(), rec)?;
    rec.check("C union of G-classes", conjugation_violation(c, &g_act));
    let b_act = acting_set(lab, SubgroupKind::B, cb.len(), rec)?;
    rec.check(
        "C_Borel union of B-classes",
        conjugation_violation(&cb, &b_act),
    );
    let t_act = acting_set(lab, SubgroupKind::T, ct.len(), rec)?;
    rec.check(
        "C_Torus union of T-classes",
        conjugation_violation(&ct, &t_act),
    );

    // (v)
    let u = lab.enumerate(SubgroupKind::U)?;
    rec.check("U C_Borel subset C_Borel", left_mult_violation(&cb, &u));
    if let Some(z) = z {
        let cbr = lab.c_borel_range(z)?;
        rec.card("C_Borel(|t|<=z)", cbr.len());
        rec.holds("C_Borel(|t|<=z) nonempty", !cbr.is_empty(), || {
            "empty".into()
        });
        rec.check(
            "U C_Borel(|t|<=z) subset C_Borel(|t|<=z)",
            left_mult_violation(&cbr, &u),
        );
    }

    // (vi)
    if r == 0 {
        let up = lab.enumerate(SubgroupKind::Uprime)?;
        rec.check(
            "Uprime C_Borel(0) subset C_Borel(0)",
            left_mult_violation(&cb, &up),
        );
    }
    Ok(())
}

/// Splits `set` into orbits of the group generated by `gens` acting by conjugation.
fn conjugacy_classes(set: &[GTuple], gens: &[GTuple]) -> Vec<Vec<GTuple>> {
    let index: HashMap<&GTuple, usize> = set.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let mut class_of = vec![usize::MAX; set.len()];
    let mut classes = Vec::new();
    for start in 0..set.len() {
        if class_of[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut members = vec![set[start].clone()];
        class_of[start] = id;
        let mut frontier = vec![start];
        while let Some(i) = frontier.pop() {
            for s in gens {
                let y = set[i].conjugate_by(s);
                // Orbits of a closed set stay inside it; a miss is reported by the caller.
                if let Some(&j) = index.get(&y) {
                    if class_of[j] == usize::MAX {
                        class_of[j] = id;
                        members.push(y);
                        frontier.push(j);
                    }
                }
            }
        }
        classes.push(members);
    }
    classes
}

fn verify_classes_meet_borel(
    lab: &GroupLab,
    t: i64,
    z: Option<f64>,
    rec: &mut Recorder,
) -> Result<()> {
    let ell = lab.ell();
    let residues: Vec<u32> = match z {
        Some(z) => residues_in_range(z, ell)?.into_iter().collect(),
        None => vec![ell.reduce(t)],
    };
    let gens = generators(SubgroupKind::G, ell, lab.g())?;
    let mut total_classes = 0usize;
    let mut total_elems = 0usize;
    for r in residues {
        let c = lab.c(r)?;
        total_elems += c.len();

        let classes = conjugacy_classes(c, &gens);
        total_classes += classes.len();
        let missing = classes.iter().find_map(|cls| {
            let meets = cls
                .iter()
                .any(|x| membership(x, SubgroupKind::B).unwrap_or(false));
            (!meets).then(|| format!("class of {} (size {})", cls[0], cls.len()))
        });
        rec.check(format!("every G-class of C(t={r}) meets B"), missing);

        // Constructive witness: componentwise SL2 conjugators.
        let mut failure = None;
        for x in c {
            let n: Result<Vec<_>> = x.mats().iter().map(borel_conjugator).collect();
            let n = GTuple::new(n?)?;
            let ok = n.common_det() == Some(1) && membership(&x.conjugate_by(&n), SubgroupKind::B)?;
            if !ok {
                failure = Some(format!("{x} with conjugator {n}"));
                break;
            }
        }
        rec.check(format!("SL2-conjugator moves C(t={r}) into B"), failure);
    }
    rec.card("C", total_elems);
    rec.card("G-classes in C", total_classes);
    Ok(())
}

fn verify_cardinalities(lab: &GroupLab, t: i64, z: Option<f64>, rec: &mut Recorder) -> Result<()> {
    let ell = lab.ell();
    let l = ell.get() as u128;
    let g = lab.g() as u32;
    let r = ell.reduce(t);
    let cb = lab.c_borel(r)?;
    let ct = lab.c_torus(r)?;
    let u_order = group_order(SubgroupKind::U, ell, lab.g())?;

    let mut preimages: HashMap<GTuple, u128> = HashMap::new();
    for x in &cb {
        *preimages.entry(coset_rep_mod_u(x)).or_default() += 1;
    }
    let hat = preimages.len() as u128;
    let (ct_n, cb_n) = (ct.len() as u128, cb.len() as u128);
    rec.card("C_Torus", ct_n);
    rec.card("C_Borel", cb_n);
    rec.card("Chat_Borel", hat);

    let torus_bound = 2 * (l - 1).pow(g);
    rec.holds("|C_Torus| <= 2(ell-1)^g", ct_n <= torus_bound, || {
        format!("{ct_n} > {torus_bound}")
    });
    rec.holds(
        "|C_Borel| = ell^g |C_Torus|",
        cb_n == l.pow(g) * ct_n,
        || format!("{cb_n} vs {} * {ct_n}", l.pow(g)),
    );
    rec.holds("|Chat_Borel| = |C_Torus|", hat == ct_n, || {
        format!("{hat} vs {ct_n}")
    });
    let bad_fiber = preimages.iter().find(|(_, &n)| n != u_order);
    rec.check(
        "each coset of Chat_Borel has |U| preimages",
        bad_fiber.map(|(rep, n)| format!("{rep} has {n} preimages, |U| = {u_order}")),
    );

    if r == 0 {
        let hat_prime: HashSet<GTuple> = cb.iter().map(coset_rep_mod_uprime).collect();
        let hp = hat_prime.len() as u128;
        rec.card("Chat'_Borel", hp);
        rec.holds(
            "|Chat'_Borel(0)| = |Chat_Borel(0)|/(ell-1)",
            hp * (l - 1) == hat,
            || format!("{hp} * {} vs {hat}", l - 1),
        );
        let bound = 2 * (l - 1).pow(g - 1);
        rec.holds("|Chat'_Borel(0)| <= 2(ell-1)^(g-1)", hp <= bound, || {
            format!("{hp} > {bound}")
        });
    }

    if let Some(z) = z {
        let range: HashSet<GTuple> = lab.c_borel_range(z)?.iter().map(coset_rep_mod_u).collect();
        let n = range.len() as u128;
        rec.card("Chat_Borel(|t|<=z)", n);
        let bound = 5.0 * (l - 1).pow(g) as f64 * z;
        rec.holds(
            "|Chat_Borel(|t|<=z)| < 5(ell-1)^g z",
            (n as f64) < bound,
            || format!("{n} >= {bound}"),
        );
    }
    Ok(())
}

fn verify_chebotarev_hypotheses(lab: &GroupLab, t: i64, rec: &mut Recorder) -> Result<()> {
    let ell = lab.ell();
    let r = ell.reduce(t);
    let b = lab.enumerate(SubgroupKind::B)?;
    let c = lab.c(r)?;
    let cb = lab.c_borel(r)?;
    rec.card("C", c.len());
    rec.card("C cap B", cb.len());

    let b_gens = generators(SubgroupKind::B, ell, lab.g())?;
    let mut quotients = vec![(SubgroupKind::U, "U")];
    if r == 0 {
        quotients.push((SubgroupKind::Uprime, "Uprime"));
    } else {
        rec.notes
            .push("(G, B, Uprime) applies only to t = 0; skipped".into());
    }
    for (kind, name) in quotients {
        let n = lab.enumerate(kind)?;
        rec.check(format!("{name} normal in B"), normality_violation(&n, &b));
        rec.check(
            format!("{name} (C cap B) subset C cap B"),
            left_mult_violation(&cb, &n),
        );
        rec.check(
            format!("B/{name} abelian"),
            commutator_violation(&b_gens, &n),
        );
    }

    let mut failure = None;
    for x in c {
        let n = GTuple::new(
            x.mats()
                .iter()
                .map(borel_conjugator)
                .collect::<Result<Vec<_>>>()?,
        )?;
        if !(membership(&n, SubgroupKind::G)? && membership(&x.conjugate_by(&n), SubgroupKind::B)?)
        {
            failure = Some(format!("{x}"));
            break;
        }
    }
    rec.check("every element of C conjugate into B", failure);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: i64) -> LemmaParams {
        LemmaParams {
            t: Some(t),
            ..Default::default()
        }
    }

    #[test]
    fn quotient_iso_small() {
        let rep = verify_lemma(LemmaId::L4_3, 3, 2, LemmaParams::default()).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.cardinalities["B/U"], 8);
        assert_eq!(rep.cardinalities["T"], 8);
    }

    #[test]
    fn set_properties_witness_mod_five() {
        let rep = verify_lemma(LemmaId::L5_1, 5, 1, params(0)).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn torus_bound_mod_three() {
        let rep = verify_lemma(LemmaId::L5_4, 3, 1, params(1)).unwrap();
        assert!(rep.pass, "{rep:?}");
        // a₁ + a₂ ≡ −1 ≡ 2 with a₁a₂ ≠ 0: only (1, 1).
        assert_eq!(rep.cardinalities["C_Torus"], 1);
    }

    #[test]
    fn rejects_ell_dividing_2g() {
        assert!(matches!(
            verify_lemma(LemmaId::L4_1, 3, 3, LemmaParams::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn normality_and_hypotheses() {
        for lemma in [LemmaId::L4_1, LemmaId::C2_2Hyp] {
            let rep = verify_lemma(lemma, 3, 2, params(0)).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn detects_a_broken_set() {
        // A set that is not closed under conjugation must be caught.
        let lab = GroupLab::new(3, 1).unwrap();
        let mut c = lab.c(0).unwrap().to_vec();
        c.truncate(1);
        let gens = generators(SubgroupKind::G, lab.ell(), 1).unwrap();
        assert!(conjugation_violation(&c, &gens).is_some());
    }

    #[test]
    fn report_serializes_with_schema_keys() {
        let rep = verify_lemma(LemmaId::L5_3, 3, 1, params(0)).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        for key in ["lemma", "ell", "g", "params", "pass", "cardinalities"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v.get("counterexample").is_none());
    }
}
