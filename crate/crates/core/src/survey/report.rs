use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;

use super::queries::{MaxSurvey, Target, TraceThreshold};
use super::sanity::sanity_checks;
use super::table::{SurveyConfig, TraceTable};
use crate::arith;
use crate::bounds::{choose_parameters, schedule, theorem1_bound, torus_variant_bound, BoundQuery};
use crate::curve::{Curve, TraceMethod};
use crate::error::{Error, Result};

pub const BAD_PRIME_DISCLOSURE: &str =
    "primes dividing the discriminant of any input model are excluded; this contains every prime of bad reduction";
pub const UNMODELED_EXCLUSION: &str =
    "the finite set of primes dividing the minimal isogeny degree is not excluded";
pub const CONDUCTOR_SURROGATE: &str = "product of |discriminant| over the input curves";

/// How the auxiliary prime ℓ is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EllQuery {
    Single(u64),
    /// Every usable ℓ in `[y, y + u]`.
    Window {
        y: f64,
        u: f64,
    },
    /// The window from the parameter schedule at `x`. When `clamp` is set it is
    /// made usable by [`usable_window`]; otherwise an infeasible schedule is an error.
    Schedule {
        clamp: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyQuery {
    pub target: Target,
    pub ell: Option<EllQuery>,
    /// The cumulative series is reported at `x·i/grid_steps`, `i = 1..=grid_steps`.
    pub grid_steps: usize,
    pub probe_bound: u64,
}

impl SurveyQuery {
    pub fn new(target: Target) -> Self {
        SurveyQuery {
            target,
            ell: None,
            grid_steps: 10,
            probe_bound: 1000,
        }
    }

    pub fn with_ell(mut self, ell: EllQuery) -> Self {
        self.ell = Some(ell);
        self
    }

    pub fn with_grid_steps(mut self, steps: usize) -> Self {
        self.grid_steps = steps;
        self
    }
}

/// A window `[y, y + u]` is widened until it holds an odd prime of good reduction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Window {
    pub raw_y: f64,
    pub raw_u: f64,
    pub y: f64,
    pub u: f64,
    pub clamped: bool,
}

/// The schedule at `x`, clamped to `y ≥ 3` and `2 ≤ u ≤ y`, then extended upward
/// until the window contains an odd prime of good reduction for all curves.
pub fn usable_window(x: f64, g: usize, t_is_zero: bool, epsilon: f64, curves: &[Curve]) -> Window {
    let raw = schedule(x, g, t_is_zero, epsilon);
    let y = raw.y.max(3.0);
    let mut u = raw.u.max(2.0).min(y);
    let usable = |l: u64| arith::is_prime(l) && curves.iter().all(|c| c.is_good(l));
    while !(y.ceil() as u64..=(y + u).floor() as u64).any(usable) {
        u += 1.0;
    }
    let clamped = y != raw.y || u != raw.u;
    Window {
        raw_y: raw.y,
        raw_u: raw.u,
        y,
        u,
        clamped,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Disclosure {
    pub bad_prime_surrogate: &'static str,
    pub unmodeled_exclusion: &'static str,
    pub conductor_surrogate: &'static str,
    /// `∏ |Δ_i|` in decimal.
    pub conductor_surrogate_value: String,
    pub bad_primes_up_to_x: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyParameters {
    pub curves: Vec<Curve>,
    pub g: usize,
    pub x: u64,
    pub target: Target,
    pub ell: Option<EllQuery>,
    pub epsilon: f64,
    pub method: TraceMethod,
    pub seed: u64,
    pub large_trace_exponent: String,
    pub probe_bound: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub x: u64,
    pub pi: u64,
    pub bound: f64,
    pub torus_bound: f64,
}

/// Everything a survey run reports. Contains nothing that depends on the thread count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyReport {
    pub parameters: SurveyParameters,
    pub disclosure: Disclosure,
    pub prime_count: u64,
    pub good_prime_count: u64,
    pub bsgs_fallbacks: u64,
    pub counts: BTreeMap<String, u64>,
    pub ratios: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_survey: Option<MaxSurvey>,
    pub warnings: Vec<String>,
    pub series: Vec<SeriesPoint>,
}

pub fn conductor_surrogate(curves: &[Curve]) -> BigUint {
    curves
        .iter()
        .map(|c| c.discriminant().magnitude().clone())
        .product()
}

/// Grid points `x·i/steps` that are at least 3, deduplicated.
pub fn series_grid(x: u64, steps: usize) -> Vec<u64> {
    let mut grid: Vec<u64> = (1..=steps as u64)
        .map(|i| (x as u128 * i as u128 / steps as u128) as u64)
        .filter(|&v| v >= 3)
        .collect();
    grid.dedup();
    grid
}

/// Assembles the report for `query` from a computed table.
pub fn build_report(
    cfg: &SurveyConfig,
    table: &TraceTable,
    query: &SurveyQuery,
) -> Result<SurveyReport> {
    if table.x() != cfg.x || table.g() != cfg.g() {
        return Err(Error::domain(
            "trace table does not match the survey configuration",
        ));
    }
    if query.grid_steps == 0 {
        return Err(Error::domain("grid_steps must be at least 1"));
    }
    let curves = &cfg.curves;
    let g = cfg.g();
    let t_is_zero = query.target == Target::Exact(0);
    let threshold = TraceThreshold::new(g, cfg.epsilon)?;

    let mut counts = BTreeMap::new();
    let mut ratios = BTreeMap::new();
    counts.insert("pi".to_string(), table.count(query.target));
    if let Target::Exact(t) = query.target {
        let d = table.nonlacunarity(t);
        counts.insert("nonlacunarity_numerator".into(), d.numerator);
        ratios.insert("nonlacunarity".into(), d.value);
    }
    let large = table.large_trace(cfg.epsilon)?;
    counts.insert("large_trace_numerator".into(), large.numerator);
    ratios.insert("large_trace".into(), large.value);

    let mut window = None;
    let mut max_survey = None;
    match query.ell {
        None => {}
        Some(EllQuery::Single(ell)) => {
            use super::queries::Splitting;
            counts.insert(
                "pi_ell".into(),
                table.count_ell(curves, ell, query.target, Splitting::Split)?,
            );
            counts.insert(
                "pi_ns_ell".into(),
                table.count_ell(curves, ell, query.target, Splitting::Inert)?,
            );
        }
        Some(EllQuery::Window { y, u }) => {
            max_survey = Some(table.max_survey(curves, query.target, y, u)?);
        }
        Some(EllQuery::Schedule { clamp }) => {
            let w = if clamp {
                usable_window(cfg.x as f64, g, t_is_zero, cfg.epsilon, curves)
            } else {
                let s = choose_parameters(cfg.x as f64, g, t_is_zero, cfg.epsilon)?;
                Window {
                    raw_y: s.y,
                    raw_u: s.u,
                    y: s.y,
                    u: s.u,
                    clamped: false,
                }
            };
            max_survey = Some(table.max_survey(curves, query.target, w.y, w.u)?);
            window = Some(w);
        }
    }
    if let Some(ms) = &max_survey {
        counts.insert("max_pi_ell".into(), ms.max);
        if let Some(r) = ms.ratio {
            ratios.insert("pi_over_max_pi_ell".into(), r);
        }
    }

    let mut series = Vec::new();
    for (x, pi) in table.series(query.target, &series_grid(cfg.x, query.grid_steps))? {
        let xf = x as f64;
        series.push(SeriesPoint {
            x,
            pi,
            bound: theorem1_bound(&BoundQuery::new(xf, g, t_is_zero, 1.0)?),
            torus_bound: torus_variant_bound(xf, g)?,
        });
    }

    let warnings = sanity_checks(curves, query.probe_bound)?
        .iter()
        .map(|w| w.to_string())
        .collect();

    debug_assert!(counts.values().all(|&c| c <= table.prime_count()));
    Ok(SurveyReport {
        parameters: SurveyParameters {
            curves: curves.clone(),
            g,
            x: cfg.x,
            target: query.target,
            ell: query.ell,
            epsilon: cfg.epsilon,
            method: cfg.method,
            seed: cfg.seed,
            large_trace_exponent: threshold.alpha().to_string(),
            probe_bound: query.probe_bound,
        },
        disclosure: Disclosure {
            bad_prime_surrogate: BAD_PRIME_DISCLOSURE,
            unmodeled_exclusion: UNMODELED_EXCLUSION,
            conductor_surrogate: CONDUCTOR_SURROGATE,
            conductor_surrogate_value: conductor_surrogate(curves).to_string(),
            bad_primes_up_to_x: table.bad_primes().to_vec(),
        },
        prime_count: table.prime_count(),
        good_prime_count: table.good_count(),
        bsgs_fallbacks: table.fallbacks(),
        counts,
        ratios,
        window,
        max_survey,
        warnings,
        series,
    })
}

/// Computes the table and the report in one step.
pub fn run_survey(cfg: &SurveyConfig, query: &SurveyQuery) -> Result<SurveyReport> {
    build_report(cfg, &TraceTable::compute(cfg)?, query)
}
