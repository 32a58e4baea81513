//! Cheap heuristics flagging inputs that fall outside the non-isogenous, non-CM setting.

use std::fmt;

use serde::Serialize;

use super::sieve;
use crate::curve::{trace, Curve, TraceMethod};
use crate::error::{Error, Result};

/// Fraction of supersingular good primes above which a curve is flagged as CM.
///
/// CM curves have a_p = 0 for about half of all primes, and that half is
/// approached from below (e.g. 52% up to 10³ for y² = x³ − x), while non-CM
/// curves have a vanishing fraction. One third separates the two at desk scale.
pub const CM_SUSPECT_FRACTION: f64 = 1.0 / 3.0;

pub const MIN_PROBE_BOUND: u64 = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Warning {
    /// Curves `i` and `j` share every trace at good primes up to the probe bound.
    IsogenySuspect {
        i: usize,
        j: usize,
        primes_compared: usize,
    },
    /// Curve `i` is supersingular at `fraction` of good primes up to the probe bound.
    CmSuspect { i: usize, fraction: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::IsogenySuspect { i, j, primes_compared } => write!(
                f,
                "ISOGENY-SUSPECT: curves {i} and {j} agree at all {primes_compared} common good primes"
            ),
            Warning::CmSuspect { i, fraction } => {
                write!(f, "CM-SUSPECT: curve {i} has a_p = 0 at {:.1}% of good primes", 100.0 * fraction)
            }
        }
    }
}

/// Heuristic isogeny and CM warnings from traces at primes `≤ probe_bound`.
pub fn sanity_checks(curves: &[Curve], probe_bound: u64) -> Result<Vec<Warning>> {
    if probe_bound < MIN_PROBE_BOUND {
        return Err(Error::domain(format!(
            "probe bound must be at least {MIN_PROBE_BOUND}, got {probe_bound}"
        )));
    }
    let primes = sieve::sieve_primes(probe_bound);
    // None marks a bad prime for that curve.
    let traces: Vec<Vec<Option<i64>>> = curves
        .iter()
        .map(|c| {
            primes
                .iter()
                .map(|&p| {
                    c.is_good(p)
                        .then(|| trace(c, p, TraceMethod::Exhaustive))
                        .transpose()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut warnings = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            let common: Vec<(i64, i64)> = traces[i]
                .iter()
                .zip(&traces[j])
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .collect();
            if !common.is_empty() && common.iter().all(|(a, b)| a == b) {
                warnings.push(Warning::IsogenySuspect {
                    i,
                    j,
                    primes_compared: common.len(),
                });
            }
        }
    }
    for (i, ts) in traces.iter().enumerate() {
        // p = 2, 3 are supersingular for reasons unrelated to CM.
        let good: Vec<i64> = ts
            .iter()
            .zip(&primes)
            .filter(|(_, &p)| p >= 5)
            .filter_map(|(a, _)| *a)
            .collect();
        if good.is_empty() {
            continue;
        }
        let fraction = good.iter().filter(|&&a| a == 0).count() as f64 / good.len() as f64;
        if fraction > CM_SUSPECT_FRACTION {
            warnings.push(Warning::CmSuspect { i, fraction });
        }
    }
    Ok(warnings)
}
