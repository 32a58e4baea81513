//! Point counts and Frobenius traces of reductions mod p.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::model::Curve;
use crate::arith::{self, add_mod, mul_mod, sub_mod};
use crate::error::{Error, Result};

/// Below this, `TraceMethod::Auto` counts points exhaustively.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 14;

/// Largest p for which the exhaustive counter tabulates quadratic residues.
const RESIDUE_TABLE_LIMIT: u64 = 1 << 24;

/// Random points tried on each of the curve and its twist before giving up.
const BSGS_POINT_ATTEMPTS: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMethod {
    #[default]
    Auto,
    Exhaustive,
    Bsgs,
}

impl std::str::FromStr for TraceMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(TraceMethod::Auto),
            "exhaustive" => Ok(TraceMethod::Exhaustive),
            "bsgs" => Ok(TraceMethod::Bsgs),
            _ => Err(Error::malformed(format!("unknown trace method `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TraceOutcome {
    pub a_p: i64,
    /// The method that produced `a_p`.
    pub method: TraceMethod,
    /// Set when BSGS could not isolate the group order and exhaustive counting took over.
    pub fell_back: bool,
}

fn check_prime_and_good(c: &Curve, p: u64) -> Result<()> {
    if !arith::is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    if !c.is_good(p) {
        return Err(Error::BadReduction {
            label: c.label().to_string(),
            p,
        });
    }
    Ok(())
}

/// `|Ē(F_p)|` by enumerating every affine `x`.
pub fn count_points(c: &Curve, p: u64) -> Result<u64> {
    check_prime_and_good(c, p)?;
    let a = exhaustive_trace(c, p);
    Ok((p as i64 + 1 - a) as u64)
}

/// `a_p` via the default method and seed 0.
pub fn trace(c: &Curve, p: u64, method: TraceMethod) -> Result<i64> {
    trace_with_seed(c, p, method, 0).map(|o| o.a_p)
}

/// `a_p` with the method actually used; `seed` drives the BSGS point choices.
pub fn trace_with_seed(c: &Curve, p: u64, method: TraceMethod, seed: u64) -> Result<TraceOutcome> {
    check_prime_and_good(c, p)?;
    let use_bsgs = match method {
        TraceMethod::Auto => p >= EXHAUSTIVE_LIMIT,
        TraceMethod::Exhaustive => false,
        TraceMethod::Bsgs => true,
    };
    let outcome = if !use_bsgs {
        TraceOutcome {
            a_p: exhaustive_trace(c, p),
            method: TraceMethod::Exhaustive,
            fell_back: false,
        }
    } else {
        match bsgs_trace(c, p, seed) {
            Some(a_p) => TraceOutcome {
                a_p,
                method: TraceMethod::Bsgs,
                fell_back: false,
            },
            None => TraceOutcome {
                a_p: exhaustive_trace(c, p),
                method: TraceMethod::Exhaustive,
                fell_back: true,
            },
        }
    };
    let a = outcome.a_p as i128;
    assert!(
        a * a <= 4 * p as i128,
        "Hasse bound violated: a_{p} = {a} for {c}"
    );
    Ok(outcome)
}

/// `a_p = −Σ_x χ(D(x))` with `D(x) = 4x³ + b2·x² + 2b4·x + b6`, the discriminant
/// of the quadratic in `y`; `p = 2` is brute force.
fn exhaustive_trace(c: &Curve, p: u64) -> i64 {
    let [a1, a2, a3, a4, a6] = c.coeffs_mod(p);
    if p == 2 {
        let mut affine = 0i64;
        for x in 0..2u64 {
            for y in 0..2u64 {
                let lhs = (y * y + a1 * x * y + a3 * y) % 2;
                let rhs = (x * x * x + a2 * x * x + a4 * x + a6) % 2;
                affine += (lhs == rhs) as i64;
            }
        }
        return 2 + 1 - (affine + 1);
    }
    let b2 = add_mod(mul_mod(a1, a1, p), mul_mod(4, a2, p), p);
    let b4x2 = mul_mod(2, add_mod(mul_mod(2, a4, p), mul_mod(a1, a3, p), p), p);
    let b6 = add_mod(mul_mod(a3, a3, p), mul_mod(4, a6, p), p);
    let four = 4 % p;
    let d = |x: u64| {
        let mut v = four;
        v = add_mod(mul_mod(v, x, p), b2, p);
        v = add_mod(mul_mod(v, x, p), b4x2, p);
        add_mod(mul_mod(v, x, p), b6, p)
    };
    let sum: i64 = if p <= RESIDUE_TABLE_LIMIT {
        let chi = residue_table(p);
        (0..p).map(|x| chi[d(x) as usize] as i64).sum()
    } else {
        (0..p).map(|x| arith::jacobi(d(x), p) as i64).sum()
    };
    -sum
}

/// `χ(v)` for every residue `v`.
fn residue_table(p: u64) -> Vec<i8> {
    let mut chi = vec![-1i8; p as usize];
    chi[0] = 0;
    for y in 1..=(p - 1) / 2 {
        chi[mul_mod(y, y, p) as usize] = 1;
    }
    chi
}

/// Affine point or the point at infinity.
type Point = Option<(u64, u64)>;

/// `y² = x³ + a·x + b` over F_p, p ≥ 5.
struct ShortCurve {
    p: u64,
    a: u64,
    b: u64,
}

impl ShortCurve {
    fn add(&self, u: Point, v: Point) -> Point {
        let p = self.p;
        let ((x1, y1), (x2, y2)) = match (u, v) {
            (None, w) | (w, None) => return w,
            (Some(u), Some(v)) => (u, v),
        };
        let lambda = if x1 == x2 {
            if add_mod(y1, y2, p) == 0 {
                return None;
            }
            let num = add_mod(mul_mod(3, mul_mod(x1, x1, p), p), self.a, p);
            mul_mod(num, arith::inv_mod(mul_mod(2, y1, p), p).expect("y ≠ 0"), p)
        } else {
            let inv = arith::inv_mod(sub_mod(x2, x1, p), p).expect("x1 ≠ x2");
            mul_mod(sub_mod(y2, y1, p), inv, p)
        };
        let x3 = sub_mod(sub_mod(mul_mod(lambda, lambda, p), x1, p), x2, p);
        let y3 = sub_mod(mul_mod(lambda, sub_mod(x1, x3, p), p), y1, p);
        Some((x3, y3))
    }

    fn mul(&self, mut k: u64, pt: Point) -> Point {
        let mut acc = None;
        let mut base = pt;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Point {
        let p = self.p;
        loop {
            let x = rng.gen_range(0..p);
            let rhs = add_mod(
                add_mod(mul_mod(mul_mod(x, x, p), x, p), mul_mod(self.a, x, p), p),
                self.b,
                p,
            );
            if let Some(y) = arith::sqrt_mod(rhs, p) {
                let y = if rng.gen::<bool>() {
                    y
                } else {
                    sub_mod(0, y, p)
                };
                return Some((x, y));
            }
        }
    }

    /// Some positive `n` with `n·P = O`, searching multiples of `m` in `[lo, hi]`.
    ///
    /// A repeated x-coordinate among the baby steps exposes a small multiple of
    /// the order instead, which serves equally well.
    fn annihilator(&self, pt: Point, m: u64, lo: u64, hi: u64) -> Option<u64> {
        let r = self.mul(m, pt);
        if r.is_none() {
            return Some(m);
        }
        let k_lo = lo.div_ceil(m).max(1);
        let k_hi = hi / m;
        if k_lo > k_hi {
            return None;
        }
        let width = arith::isqrt_ceil(k_hi - k_lo + 1).max(1);

        let mut baby: HashMap<u64, (u64, u64)> = HashMap::with_capacity(width as usize);
        let mut q = None;
        for j in 1..=width {
            q = self.add(q, r);
            let Some((x, y)) = q else { return Some(m * j) };
            if let Some(&(j0, y0)) = baby.get(&x) {
                // q = ±(j0·R)
                return Some(m * if y == y0 { j - j0 } else { j + j0 });
            }
            baby.insert(x, (j, y));
        }

        let step = self.mul(width, r);
        let mut k = k_lo;
        let mut giant = self.mul(k_lo, r);
        while k <= k_hi {
            let Some((x, y)) = giant else {
                return Some(m * k);
            };
            if let Some(&(j, yj)) = baby.get(&x) {
                // j·R = −giant gives (k + j)·R = O; j·R = giant gives (k − j)·R = O.
                let n = if yj == y {
                    k.checked_sub(j).filter(|&n| n > 0)
                } else {
                    Some(k + j)
                };
                if let Some(n) = n {
                    return Some(m * n);
                }
            }
            giant = self.add(giant, step);
            k += width;
        }
        None
    }

    /// Exact order of `pt`, given a multiple `n` of it.
    fn order_from_multiple(&self, pt: Point, mut n: u64) -> u64 {
        for (q, _) in arith::factor_u64(n) {
            while n.is_multiple_of(q) && self.mul(n / q, pt).is_none() {
                n /= q;
            }
        }
        n
    }

    /// Least common multiple of the orders of `attempts` random points,
    /// or `None` if an order search failed outright.
    fn exponent_lower_bound(
        &self,
        rng: &mut ChaCha8Rng,
        lo: u64,
        hi: u64,
        attempts: usize,
        mut done: impl FnMut(u64) -> bool,
    ) -> Option<u64> {
        let mut m = 1u64;
        for _ in 0..attempts {
            let pt = self.random_point(rng);
            let n = self.annihilator(pt, m, lo, hi)?;
            let ord = self.order_from_multiple(pt, n);
            m = num_integer::lcm(m, ord);
            if done(m) {
                break;
            }
        }
        Some(m)
    }
}

/// `a_p` by order finding in the Hasse interval, using the quadratic twist when
/// the curve alone leaves several candidates. `None` means still ambiguous.
fn bsgs_trace(c: &Curve, p: u64, seed: u64) -> Option<i64> {
    if p < 5 {
        return None;
    }
    let (a, b) = c.short_model_mod(p);
    let curve = ShortCurve { p, a, b };
    let radius = arith::isqrt(4 * p);
    let (lo, hi) = (p + 1 - radius, p + 1 + radius);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15));

    let candidates = |m: u64| (lo.div_ceil(m) * m..=hi).step_by(m as usize);
    let m = curve.exponent_lower_bound(&mut rng, lo, hi, BSGS_POINT_ATTEMPTS, |m| {
        candidates(m).take(2).count() == 1
    })?;
    let mut cands: Vec<u64> = candidates(m).collect();

    if cands.len() > 1 {
        // The twist has 2p + 2 − N points, in the same interval.
        let d = arith::least_non_residue(p);
        let d2 = mul_mod(d, d, p);
        let twist = ShortCurve {
            p,
            a: mul_mod(a, d2, p),
            b: mul_mod(b, mul_mod(d2, d, p), p),
        };
        let consistent = |m_twist: u64, n: u64| (2 * p + 2 - n).is_multiple_of(m_twist);
        let m_twist = twist.exponent_lower_bound(&mut rng, lo, hi, BSGS_POINT_ATTEMPTS, |mt| {
            cands.iter().filter(|&&n| consistent(mt, n)).take(2).count() == 1
        })?;
        cands.retain(|&n| consistent(m_twist, n));
    }
    match cands.as_slice() {
        [n] => Some(p as i64 + 1 - *n as i64),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> Curve {
        Curve::short("E1", 1, 1).unwrap()
    }

    /// Counts solutions of the long equation over all (x, y).
    fn brute_count(c: &Curve, p: u64) -> u64 {
        let [a1, a2, a3, a4, a6] = c.coeffs_mod(p);
        let mut n = 1;
        for x in 0..p {
            for y in 0..p {
                let lhs = (y * y + a1 * x * y + a3 * y) % p;
                let rhs = (x * x % p * x + a2 * x % p * x + a4 * x + a6) % p;
                n += (lhs == rhs) as u64;
            }
        }
        n
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_points(&e1(), 5).unwrap(), 9);
        assert_eq!(count_points(&e1(), 3).unwrap(), 4);
        assert!(matches!(
            count_points(&e1(), 2),
            Err(Error::BadReduction { p: 2, .. })
        ));
    }

    #[test]
    fn trace_examples() {
        assert_eq!(trace(&e1(), 5, TraceMethod::Auto).unwrap(), -3);
        assert_eq!(trace(&e1(), 3, TraceMethod::Auto).unwrap(), 0);
        assert_eq!(trace(&e1(), 7, TraceMethod::Auto).unwrap(), 3);
    }

    #[test]
    fn exhaustive_matches_double_loop_on_long_models() {
        let curves = [
            Curve::new("11a3", [0, -1, 1, 0, 0]).unwrap(),
            Curve::new("37a1", [0, 0, 1, -1, 0]).unwrap(),
            Curve::new("mixed", [1, -1, 1, -3, 3]).unwrap(),
            e1(),
        ];
        for c in &curves {
            for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43] {
                if c.is_good(p) {
                    assert_eq!(count_points(c, p).unwrap(), brute_count(c, p), "{c} at {p}");
                }
            }
        }
    }

    #[test]
    fn bsgs_agrees_with_exhaustive() {
        let curves = [
            e1(),
            Curve::new("37a1", [0, 0, 1, -1, 0]).unwrap(),
            Curve::short("cm", -1, 0).unwrap(),
        ];
        for c in &curves {
            for p in (5u64..3000).filter(|&p| arith::is_prime(p) && c.is_good(p)) {
                let ex = trace(c, p, TraceMethod::Exhaustive).unwrap();
                let bs = trace_with_seed(c, p, TraceMethod::Bsgs, 7).unwrap();
                assert_eq!(bs.a_p, ex, "{c} at {p} ({bs:?})");
            }
        }
    }

    #[test]
    fn bsgs_rarely_falls_back_at_large_p() {
        let c = e1();
        let fallbacks = (1u64 << 20..(1 << 20) + 2000)
            .filter(|&p| arith::is_prime(p))
            .filter(|&p| {
                trace_with_seed(&c, p, TraceMethod::Bsgs, 0)
                    .unwrap()
                    .fell_back
            })
            .count();
        assert_eq!(fallbacks, 0);
    }

    #[test]
    fn bsgs_is_seed_independent() {
        let c = Curve::new("37a1", [0, 0, 1, -1, 0]).unwrap();
        let p = 1_000_003;
        let a = trace_with_seed(&c, p, TraceMethod::Bsgs, 0).unwrap().a_p;
        for seed in 1..5 {
            assert_eq!(
                trace_with_seed(&c, p, TraceMethod::Bsgs, seed).unwrap().a_p,
                a
            );
        }
    }

    #[test]
    fn bad_and_composite_inputs() {
        assert!(matches!(
            trace(&e1(), 31, TraceMethod::Auto),
            Err(Error::BadReduction { .. })
        ));
        assert!(matches!(
            trace(&e1(), 9, TraceMethod::Auto),
            Err(Error::Domain(_))
        ));
    }
}
