//! Closed-form upper bounds for trace counts and the auxiliary-prime schedule
//! behind them. All logarithms are natural; all implied constants are 1 unless
//! a multiplier is passed explicitly.
//!
//! The functions are generic over the float type; exponents are kept as exact
//! rationals and converted only at evaluation time.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group_lab::{group_order, PrimeModulus, SubgroupKind};

/// Default exponent slack in `u = y^{1/2}(ln y)^{2+ε}`.
pub const DEFAULT_EPSILON: f64 = 0.1;

fn cast<F: FromPrimitive>(v: f64) -> F {
    F::from_f64(v).expect("float type represents every f64 constant used here")
}

fn ratio_to<F: Float + FromPrimitive>(r: Ratio<i64>) -> F {
    cast::<F>(*r.numer() as f64) / cast::<F>(*r.denom() as f64)
}

/// `x^{x_exp} / (ln x)^{log_exp}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExponentPair {
    #[serde(serialize_with = "ser_ratio")]
    pub x_exp: Ratio<i64>,
    #[serde(serialize_with = "ser_ratio")]
    pub log_exp: Ratio<i64>,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<i64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl ExponentPair {
    /// `(1 − 1/k, 1 − 2/k)`.
    fn complement(k: i64) -> Self {
        let one = Ratio::from_integer(1);
        ExponentPair {
            x_exp: one - Ratio::new(1, k),
            log_exp: one - Ratio::new(2, k),
        }
    }

    pub fn eval<F: Float + FromPrimitive>(&self, x: F) -> F {
        x.powf(ratio_to(self.x_exp)) / x.ln().powf(ratio_to(self.log_exp))
    }
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x^({})/(ln x)^({})", self.x_exp, self.log_exp)
    }
}

fn kappa(t_is_zero: bool) -> i64 {
    if t_is_zero {
        1
    } else {
        2
    }
}

/// Exponents of the main bound: `k = 3g + 1` for t = 0, `3g + 2` otherwise.
pub fn theorem1_exponents(g: usize, t_is_zero: bool) -> ExponentPair {
    ExponentPair::complement(3 * g as i64 + kappa(t_is_zero))
}

/// Exponents of the bound obtained through the non-split Cartan: `k = 5g + 2`.
pub fn torus_exponents(g: usize) -> ExponentPair {
    ExponentPair::complement(5 * g as i64 + 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundQuery<F> {
    pub x: F,
    pub g: usize,
    pub t_is_zero: bool,
    /// Multiplier standing in for the implied constant.
    pub constant: F,
}

impl<F: Float + FromPrimitive> BoundQuery<F> {
    pub fn new(x: F, g: usize, t_is_zero: bool, constant: F) -> Result<Self> {
        let q = BoundQuery {
            x,
            g,
            t_is_zero,
            constant,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        check_x(self.x)?;
        if self.g == 0 {
            return Err(Error::domain("g must be at least 1"));
        }
        if !(self.constant > F::zero() && self.constant.is_finite()) {
            return Err(Error::domain("constant must be positive"));
        }
        Ok(())
    }
}

fn check_x<F: Float + FromPrimitive>(x: F) -> Result<()> {
    if !(x > cast(std::f64::consts::E) && x.is_finite()) {
        return Err(Error::domain(format!(
            "x must exceed e, got {}",
            x.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

/// `constant · x^{1−1/(3g+κ)} / (ln x)^{1−2/(3g+κ)}`.
pub fn theorem1_bound<F: Float + FromPrimitive>(q: &BoundQuery<F>) -> F {
    q.constant * theorem1_exponents(q.g, q.t_is_zero).eval(q.x)
}

/// `x^{1−1/(5g+2)} / (ln x)^{1−2/(5g+2)}`.
pub fn torus_variant_bound<F: Float + FromPrimitive>(x: F, g: usize) -> Result<F> {
    check_x(x)?;
    if g == 0 {
        return Err(Error::domain("g must be at least 1"));
    }
    Ok(torus_exponents(g).eval(x))
}

/// Auxiliary-prime window `[y, y + u]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParamSchedule<F> {
    pub y: F,
    pub u: F,
    pub epsilon: F,
}

impl<F: Float + FromPrimitive> ParamSchedule<F> {
    /// `y > 3` and `u ≤ y`; `u ≥ y^{1/2}(ln y)^{2+ε}` holds by construction.
    pub fn is_feasible(&self) -> bool {
        self.y > cast(3.0) && self.u <= self.y
    }
}

/// `y = x^{1/k}/(ln x)^{2/k}`, `u = y^{1/2}(ln y)^{2+ε}`, with `k = 3g + κ`, unchecked.
pub fn schedule<F: Float + FromPrimitive>(
    x: F,
    g: usize,
    t_is_zero: bool,
    epsilon: F,
) -> ParamSchedule<F> {
    let k = cast::<F>((3 * g as i64 + kappa(t_is_zero)) as f64);
    let y = x.powf(k.recip()) / x.ln().powf(cast::<F>(2.0) / k);
    let u = y.sqrt() * y.ln().abs().powf(cast::<F>(2.0) + epsilon);
    ParamSchedule { y, u, epsilon }
}

/// The schedule at `x`, or an error naming the smallest feasible `x' ≥ x`.
pub fn choose_parameters<F: Float + FromPrimitive>(
    x: F,
    g: usize,
    t_is_zero: bool,
    epsilon: F,
) -> Result<ParamSchedule<F>> {
    check_x(x)?;
    if g == 0 {
        return Err(Error::domain("g must be at least 1"));
    }
    if !(epsilon > F::zero()) {
        return Err(Error::domain("epsilon must be positive"));
    }
    let s = schedule(x, g, t_is_zero, epsilon);
    if s.is_feasible() {
        assert!(s.u >= s.y.sqrt() * s.y.ln().powf(cast::<F>(2.0) + epsilon) * cast(1.0 - 1e-12));
        return Ok(s);
    }
    let xf = x.to_f64().unwrap_or(f64::NAN);
    let eps = epsilon.to_f64().unwrap_or(f64::NAN);
    Err(Error::ScheduleInfeasible {
        x: xf,
        y: s.y.to_f64().unwrap_or(f64::NAN),
        u: s.u.to_f64().unwrap_or(f64::NAN),
        next_feasible_x: next_feasible_x(xf, g, t_is_zero, eps),
    })
}

/// Smallest feasible `x' ≥ x`, located on a grid in `ln x` and refined by
/// bisection; `∞` if nothing below `e^{4000}` is feasible.
fn next_feasible_x(x: f64, g: usize, t_is_zero: bool, eps: f64) -> f64 {
    let feasible = |ln_x: f64| schedule(ln_x.exp(), g, t_is_zero, eps).is_feasible();
    const STEP: f64 = 0.01;
    let mut lo = x.ln();
    let mut hi = lo;
    loop {
        hi += STEP;
        if hi > 4000.0 || !hi.exp().is_finite() {
            return f64::INFINITY;
        }
        if feasible(hi) {
            break;
        }
        lo = hi;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi.exp()
}

/// Which unipotent quotient the Chebotarev step uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ChebotarevVariant {
    /// B/U, for t ≠ 0.
    U,
    /// B/U′, for t = 0.
    Uprime,
}

impl FromStr for ChebotarevVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U" | "u" => Ok(ChebotarevVariant::U),
            "Uprime" | "uprime" | "U'" => Ok(ChebotarevVariant::Uprime),
            _ => Err(Error::InvalidVariant(format!(
                "`{s}` (expected U or Uprime)"
            ))),
        }
    }
}

fn check_ell_n<F: Float + FromPrimitive>(ell: u64, n: F) -> Result<()> {
    if ell < 3 {
        return Err(Error::domain(format!("ell must be at least 3, got {ell}")));
    }
    if !(n >= F::one()) {
        return Err(Error::domain("conductor surrogate must be at least 1"));
    }
    Ok(())
}

/// The two terms `x/(ℓ ln x)` and `g ℓ^e x^{1/2}/ln x · ln(ℓN)`, with
/// `e = 3g/2` for U and `(3g − 1)/2` for U′.
pub fn chebotarev_terms<F: Float + FromPrimitive>(
    x: F,
    ell: u64,
    g: usize,
    n: F,
    variant: ChebotarevVariant,
) -> Result<(F, F)> {
    check_x(x)?;
    check_ell_n(ell, n)?;
    let l = cast::<F>(ell as f64);
    let gf = cast::<F>(g as f64);
    let three_g = cast::<F>(3.0 * g as f64);
    let e = match variant {
        ChebotarevVariant::U => three_g / cast(2.0),
        ChebotarevVariant::Uprime => (three_g - F::one()) / cast(2.0),
    };
    let main = x / (l * x.ln());
    let error = gf * l.powf(e) * x.sqrt() / x.ln() * (l * n).ln();
    Ok((main, error))
}

pub fn chebotarev_rhs<F: Float + FromPrimitive>(
    x: F,
    ell: u64,
    g: usize,
    n: F,
    variant: ChebotarevVariant,
) -> Result<F> {
    let (a, b) = chebotarev_terms(x, ell, g, n, variant)?;
    Ok(a + b)
}

/// `2 ln|B/N| + 2 ln(ℓ·N_A) + ln 2` with `N = U` or `U′`, orders taken from the group lab.
pub fn log_m_surrogate<F: Float + FromPrimitive>(
    ell: u64,
    n: F,
    g: usize,
    variant: ChebotarevVariant,
) -> Result<F> {
    check_ell_n(ell, n)?;
    let m = PrimeModulus::new(ell)?;
    let sub = match variant {
        ChebotarevVariant::U => SubgroupKind::U,
        ChebotarevVariant::Uprime => SubgroupKind::Uprime,
    };
    let quotient = group_order(SubgroupKind::B, m, g)? / group_order(sub, m, g)?;
    let two = cast::<F>(2.0);
    let l = cast::<F>(ell as f64);
    Ok(two * cast::<F>(quotient as f64).ln() + two * (l * n).ln() + two.ln())
}

/// One row of the bound overlay: `x, bound, torus_bound, y, u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundRow<F> {
    pub x: F,
    pub bound: F,
    pub torus_bound: F,
    pub y: F,
    pub u: F,
}

/// `steps + 1` evenly spaced points from `a` to `b` inclusive.
pub fn linear_grid<F: Float + FromPrimitive>(a: F, b: F, steps: usize) -> Result<Vec<F>> {
    if steps == 0 || !(a < b) {
        return Err(Error::domain("grid needs a < b and at least one step"));
    }
    let n = cast::<F>(steps as f64);
    Ok((0..=steps)
        .map(|i| a + (b - a) * cast::<F>(i as f64) / n)
        .collect())
}

/// Bound rows over a grid; the multiplier applies to both bounds, and `(y, u)`
/// is the raw schedule, feasible or not.
pub fn bound_rows<F: Float + FromPrimitive>(
    grid: &[F],
    g: usize,
    t_is_zero: bool,
    constant: F,
    epsilon: F,
) -> Result<Vec<BoundRow<F>>> {
    grid.iter()
        .map(|&x| {
            let q = BoundQuery::new(x, g, t_is_zero, constant)?;
            let s = schedule(x, g, t_is_zero, epsilon);
            Ok(BoundRow {
                x,
                bound: theorem1_bound(&q),
                torus_bound: constant * torus_variant_bound(x, g)?,
                y: s.y,
                u: s.u,
            })
        })
        .collect()
}

pub fn write_bounds_csv<F: Float + fmt::Display, W: Write>(
    rows: &[BoundRow<F>],
    out: W,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["x", "bound", "torus_bound", "y", "u"])?;
    for r in rows {
        w.write_record([r.x, r.bound, r.torus_bound, r.y, r.u].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
