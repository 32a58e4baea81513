//! Counting functions over a [`TraceTable`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use serde::Serialize;

use super::table::TraceTable;
use crate::arith;
use crate::curve::{frobenius_disc, Curve};
use crate::error::{Error, Result};

/// Which values of `a_{1,p}` a count accepts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `a_{1,p} = t`.
    Exact(i64),
    /// `|a_{1,p}| ≤ z`.
    UpTo(f64),
}

impl Target {
    pub fn matches(&self, a1p: i64) -> bool {
        match *self {
            Target::Exact(t) => a1p == t,
            Target::UpTo(z) => (a1p.unsigned_abs() as f64) <= z,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Exact(t) => write!(f, "t={t}"),
            Target::UpTo(z) => write!(f, "|t|<={z}"),
        }
    }
}

/// How ℓ decomposes in `Q(√(a² − 4p))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

/// Splitting of an odd prime `ℓ ≠ p` in the Frobenius field of `(a_p, p)`.
pub fn splits_completely(a_p: i64, p: u64, ell: u64) -> Result<Splitting> {
    if ell == 2 || !arith::is_prime(ell) {
        return Err(Error::domain(format!(
            "ell must be an odd prime, got {ell}"
        )));
    }
    if ell == p {
        return Err(Error::domain(format!("ell = p = {p}")));
    }
    let d = frobenius_disc(a_p, p).rem_euclid(ell as i128) as u64;
    Ok(match arith::jacobi(d, ell) {
        0 => Splitting::Ramified,
        1 => Splitting::Split,
        _ => Splitting::Inert,
    })
}

/// An exact ratio, also given as a float.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Density {
    pub numerator: u64,
    pub denominator: u64,
    pub value: f64,
}

impl Density {
    fn new(numerator: u64, denominator: u64) -> Self {
        let value = if denominator == 0 {
            0.0
        } else {
            numerator as f64 / denominator as f64
        };
        Density {
            numerator,
            denominator,
            value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxSurvey {
    pub y: f64,
    pub u: f64,
    /// `(ℓ, π_A(x, ℓ, target))` for each usable ℓ in `[y, y + u]`, ascending.
    pub per_ell: Vec<(u64, u64)>,
    pub max: u64,
    /// Smallest ℓ attaining the maximum.
    pub argmax: u64,
    pub pi_t: u64,
    /// `π_A(x, target) / max`; 0 when `π_A(x, target) = 0`, absent when only the maximum is 0.
    pub ratio: Option<f64>,
}

/// `|a| > p^α` for a fixed rational α, decided exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceThreshold {
    alpha: Ratio<i64>,
}

impl TraceThreshold {
    /// `α = 1/(3g + 1) − ε`, with ε replaced by the simplest nearby rational.
    pub fn new(g: usize, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::domain(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let eps = Ratio::<i64>::approximate_float(epsilon).ok_or_else(|| {
            Error::domain(format!("epsilon {epsilon} has no rational approximation"))
        })?;
        Ok(TraceThreshold {
            alpha: Ratio::new(1, 3 * g as i64 + 1) - eps,
        })
    }

    pub fn alpha(&self) -> Ratio<i64> {
        self.alpha
    }

    pub fn exceeds(&self, a: i64, p: u64) -> bool {
        let a = a.unsigned_abs();
        let (num, den) = (*self.alpha.numer(), *self.alpha.denom());
        if a == 0 {
            return false;
        }
        if num < 0 {
            return true; // p^α < 1 ≤ |a|
        }
        if num == 0 {
            return a > 1;
        }
        let lhs = den as f64 * (a as f64).ln();
        let rhs = num as f64 * (p as f64).ln();
        if (lhs - rhs).abs() > 1e-9 * (lhs.abs() + rhs.abs()) {
            return lhs > rhs;
        }
        BigUint::from(a).pow(den as u32) > BigUint::from(p).pow(num as u32)
    }
}

impl TraceTable {
    /// `π_A(x, t)`, or its range version.
    pub fn count(&self, target: Target) -> u64 {
        self.records()
            .iter()
            .filter(|r| target.matches(r.a1p))
            .count() as u64
    }

    pub fn pi_t(&self, t: i64) -> u64 {
        self.count(Target::Exact(t))
    }

    /// Primes counted by `target` where ℓ has the given splitting in every Frobenius field.
    ///
    /// ℓ must be an odd prime of good reduction for every curve; `p = ℓ` is skipped.
    pub fn count_ell(
        &self,
        curves: &[Curve],
        ell: u64,
        target: Target,
        want: Splitting,
    ) -> Result<u64> {
        if ell == 2 || !arith::is_prime(ell) {
            return Err(Error::domain(format!(
                "ell must be an odd prime, got {ell}"
            )));
        }
        if let Some(c) = curves.iter().find(|c| !c.is_good(ell)) {
            return Err(Error::domain(format!(
                "ell = {ell} divides the discriminant of `{}`",
                c.label()
            )));
        }
        let mut n = 0;
        for r in self.records() {
            if r.p == ell || !target.matches(r.a1p) {
                continue;
            }
            let mut all = true;
            for &a in &r.traces {
                if splits_completely(a, r.p, ell)? != want {
                    all = false;
                    break;
                }
            }
            n += all as u64;
        }
        Ok(n)
    }

    /// `π_A(x, ℓ, t)`.
    pub fn pi_ell_t(&self, curves: &[Curve], ell: u64, t: i64) -> Result<u64> {
        self.count_ell(curves, ell, Target::Exact(t), Splitting::Split)
    }

    /// Inert analogue of [`TraceTable::pi_ell_t`].
    pub fn pi_ns_ell_t(&self, curves: &[Curve], ell: u64, t: i64) -> Result<u64> {
        self.count_ell(curves, ell, Target::Exact(t), Splitting::Inert)
    }

    /// Exact maximum of `π_A(x, ℓ, target)` over odd primes ℓ in `[y, y + u]`
    /// of good reduction for all curves.
    pub fn max_survey(
        &self,
        curves: &[Curve],
        target: Target,
        y: f64,
        u: f64,
    ) -> Result<MaxSurvey> {
        if !(y.is_finite() && u.is_finite() && u >= 0.0) {
            return Err(Error::domain(format!("bad window [{y}, {y} + {u}]")));
        }
        let lo = y.ceil().max(3.0) as u64;
        let hi = (y + u).floor().max(0.0) as u64;
        let ells: Vec<u64> = (lo..=hi)
            .filter(|&l| arith::is_prime(l) && curves.iter().all(|c| c.is_good(l)))
            .collect();
        if ells.is_empty() {
            return Err(Error::domain(format!(
                "no odd prime of good reduction in [{y}, {}]",
                y + u
            )));
        }
        let per_ell = ells
            .iter()
            .map(|&l| Ok((l, self.count_ell(curves, l, target, Splitting::Split)?)))
            .collect::<Result<Vec<_>>>()?;
        let (argmax, max) = per_ell.iter().copied().fold((0, 0), |best, (l, n)| {
            if n > best.1 || best.0 == 0 {
                (l, n)
            } else {
                best
            }
        });
        let pi_t = self.count(target);
        let ratio = match (pi_t, max) {
            (0, _) => Some(0.0),
            (_, 0) => None,
            (n, m) => Some(n as f64 / m as f64),
        };
        Ok(MaxSurvey {
            y,
            u,
            per_ell,
            max,
            argmax,
            pi_t,
            ratio,
        })
    }

    /// `#{p ≤ x good : a_{1,p} ≠ t} / π(x)`.
    pub fn nonlacunarity(&self, t: i64) -> Density {
        Density::new(self.good_count() - self.pi_t(t), self.prime_count())
    }

    /// `#{p ≤ x good : |a_{1,p}| > p^{1/(3g+1) − ε}} / π(x)`.
    pub fn large_trace(&self, epsilon: f64) -> Result<Density> {
        let th = TraceThreshold::new(self.g(), epsilon)?;
        let n = self
            .records()
            .iter()
            .filter(|r| th.exceeds(r.a1p, r.p))
            .count() as u64;
        Ok(Density::new(n, self.prime_count()))
    }

    /// Number of good primes with each observed value of `a_{1,p}`.
    pub fn histogram(&self) -> BTreeMap<i64, u64> {
        let mut h = BTreeMap::new();
        for r in self.records() {
            *h.entry(r.a1p).or_insert(0) += 1;
        }
        h
    }

    /// `π_A(x_i, target)` at each grid point `x_i ≤ x` (ascending grid required).
    pub fn series(&self, target: Target, grid: &[u64]) -> Result<Vec<(u64, u64)>> {
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("grid must be strictly increasing"));
        }
        if let Some(&last) = grid.last() {
            if last > self.x() {
                return Err(Error::domain(format!(
                    "grid point {last} exceeds surveyed x = {}",
                    self.x()
                )));
            }
        }
        let mut out = Vec::with_capacity(grid.len());
        let mut n = 0;
        let mut recs = self.records().iter().peekable();
        for &gx in grid {
            while let Some(r) = recs.next_if(|r| r.p <= gx) {
                n += target.matches(r.a1p) as u64;
            }
            out.push((gx, n));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::SurveyConfig;

    fn e1() -> Curve {
        Curve::short("E1", 1, 1).unwrap()
    }

    fn table(curves: &[Curve], x: u64) -> TraceTable {
        TraceTable::compute(&SurveyConfig::new(curves.to_vec(), x).unwrap()).unwrap()
    }

    #[test]
    fn pi_t_examples() {
        let t = table(&[e1()], 10);
        assert_eq!(t.pi_t(0), 1);
        assert_eq!(t.pi_t(3), 1);
        assert_eq!(t.pi_t(100), 0);
    }

    #[test]
    fn splitting_examples() {
        assert_eq!(splits_completely(-3, 5, 3).unwrap(), Splitting::Split);
        assert_eq!(splits_completely(-3, 5, 11).unwrap(), Splitting::Ramified);
        assert_eq!(splits_completely(0, 7, 5).unwrap(), Splitting::Inert);
        assert!(splits_completely(0, 7, 7).is_err());
        assert!(splits_completely(0, 7, 2).is_err());
        assert!(splits_completely(0, 7, 9).is_err());
    }

    #[test]
    fn pi_ell_t_examples() {
        let c = [e1()];
        let t = table(&c, 10);
        assert_eq!(t.pi_ell_t(&c, 3, 3).unwrap(), 1);
        assert_eq!(t.pi_ell_t(&c, 5, 3).unwrap(), 0);
        assert!(t.pi_ell_t(&c, 31, 0).is_err());
    }

    #[test]
    fn max_survey_examples() {
        let c = [e1()];
        let t = table(&c, 1000);
        let ms = t.max_survey(&c, Target::Exact(0), 5.0, 25.0).unwrap();
        let at7 = t.pi_ell_t(&c, 7, 0).unwrap();
        assert!(ms.max >= at7);
        assert_eq!(
            ms.per_ell.iter().map(|e| e.0).collect::<Vec<_>>(),
            vec![5, 7, 11, 13, 17, 19, 23, 29]
        );

        let single = t.max_survey(&c, Target::Exact(0), 7.0, 0.5).unwrap();
        assert_eq!((single.max, single.argmax), (at7, 7));

        assert!(t.max_survey(&c, Target::Exact(0), 8.0, 2.5).is_err());
        let none = t.max_survey(&c, Target::Exact(10_000), 5.0, 25.0).unwrap();
        assert_eq!(none.ratio, Some(0.0));
    }

    #[test]
    fn nonlacunarity_partition() {
        let c = [e1()];
        let t = table(&c, 10_000);
        let d = t.nonlacunarity(0);
        assert_eq!(
            d.numerator,
            t.prime_count() - t.pi_t(0) - t.bad_primes().len() as u64
        );
        assert!(d.value >= 0.95, "{d:?}");
    }

    #[test]
    fn threshold_collapse() {
        // ε = 1/(3g + 1): threshold exactly 1.
        let th = TraceThreshold::new(1, 0.25).unwrap();
        assert_eq!(th.alpha(), Ratio::new(0, 1));
        assert!(!th.exceeds(1, 101) && th.exceeds(2, 101) && th.exceeds(-2, 101));
        // Larger ε: threshold below 1, so any nonzero trace counts.
        let th = TraceThreshold::new(1, 0.5).unwrap();
        assert!(th.exceeds(1, 101) && !th.exceeds(0, 101));
        // g = 2, ε = 0.05: α = 1/7 − 1/20 = 13/140.
        assert_eq!(
            TraceThreshold::new(2, 0.05).unwrap().alpha(),
            Ratio::new(13, 140)
        );
    }

    #[test]
    fn threshold_boundary_is_exact() {
        // α = 1/2 (g = 0 is not a survey, so build it directly): |a| > √p.
        let th = TraceThreshold {
            alpha: Ratio::new(1, 2),
        };
        assert!(!th.exceeds(3, 9) && th.exceeds(4, 9) && !th.exceeds(2, 9));
        let th = TraceThreshold {
            alpha: Ratio::new(2, 3),
        };
        assert!(!th.exceeds(4, 8) && th.exceeds(5, 8));
    }

    #[test]
    fn large_trace_ratio() {
        let t = table(&[e1()], 10_000);
        assert!(t.large_trace(0.05).unwrap().value >= 0.9);
    }

    #[test]
    fn series_is_cumulative() {
        let t = table(&[e1()], 1000);
        let s = t.series(Target::Exact(0), &[10, 100, 1000]).unwrap();
        assert_eq!(s[0], (10, 1));
        assert_eq!(s[2].1, t.pi_t(0));
        assert!(t.series(Target::Exact(0), &[100, 10]).is_err());
        assert!(t.series(Target::Exact(0), &[2000]).is_err());
    }
}
