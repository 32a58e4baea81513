use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Structurally invalid input (mixed moduli, empty tuples, bad catalog lines).
    #[error("malformed input: {0}")]
    Malformed(String),

    /// A mathematical precondition does not hold.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("enumeration of {order} elements exceeds the size guard of {cap}")]
    SizeGuard { order: u128, cap: u128 },

    #[error("singular Weierstrass model (zero discriminant) for curve `{0}`")]
    SingularModel(String),

    #[error("curve `{label}` has bad reduction at p = {p}")]
    BadReduction { label: String, p: u64 },

    #[error("invalid variant: {0}")]
    InvalidVariant(String),

    #[error("parameter schedule infeasible at x = {x} (y = {y}, u = {u}; need y > 3 and u <= y); smallest feasible x above it is {next_feasible_x}")]
    ScheduleInfeasible {
        x: f64,
        y: f64,
        u: f64,
        next_feasible_x: f64,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        Error::Malformed(msg.into())
    }
}
