//! Elliptic curves over Q, their reductions mod p, Frobenius traces and Weil polynomials.

mod cache;
mod count;
mod model;
mod weil;

pub use cache::{curve_key, TraceCache, CACHE_MAGIC};
pub use count::{
    count_points, trace, trace_with_seed, TraceMethod, TraceOutcome, EXHAUSTIVE_LIMIT,
};
pub use model::{discriminant_and_bad_primes, parse_catalog, read_catalog, Curve};
pub use weil::{
    a1p_coefficient, frobenius_disc, product_weil_poly, product_weil_poly_mod, weil_poly,
    weil_poly_mod, WeilPoly,
};
