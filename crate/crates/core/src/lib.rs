//! Frobenius trace statistics for products of elliptic curves over Q.
//!
//! * [`group_lab`]: subgroups of GL₂(Z/ℓZ)^g and the conjugacy sets cut out by
//!   a trace condition, with exhaustive verifiers for their structure.
//! * [`curve`]: reductions mod p, point counts, traces and Weil polynomials.
//! * [`survey`]: traces at every prime up to x and the counting functions on them.
//! * [`bounds`]: closed-form bounds and parameter schedules, generic over the float type.

pub mod arith;
pub mod bounds;
pub mod curve;
pub mod error;
pub mod group_lab;
pub mod poly;
pub mod survey;

pub use error::{Error, Result};

/// Bound query in double precision.
pub type BoundQuery = bounds::BoundQuery<f64>;
/// Parameter schedule in double precision.
pub type ParamSchedule = bounds::ParamSchedule<f64>;
/// One row of the bound overlay in double precision.
pub type BoundRow = bounds::BoundRow<f64>;
pub use curve::WeilPoly;
