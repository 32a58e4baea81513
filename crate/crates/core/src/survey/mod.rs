//! Batch trace surveys over all primes up to x and the counting functions built on them.

mod export;
mod queries;
mod report;
mod sanity;
mod sieve;
mod table;

pub use export::{read_per_ell_csv, write_histogram_csv, write_per_ell_csv, PER_ELL_HEADER};
pub use queries::{splits_completely, Density, MaxSurvey, Splitting, Target, TraceThreshold};
pub use report::{
    build_report, conductor_surrogate, run_survey, series_grid, usable_window, Disclosure,
    EllQuery, SeriesPoint, SurveyParameters, SurveyQuery, SurveyReport, Window,
    BAD_PRIME_DISCLOSURE, CONDUCTOR_SURROGATE, UNMODELED_EXCLUSION,
};
pub use sanity::{sanity_checks, Warning, CM_SUSPECT_FRACTION, MIN_PROBE_BOUND};
pub use sieve::{for_each_prime_in, prime_count, primes_in, sieve_primes};
pub use table::{batch_traces, SurveyConfig, TraceRecord, TraceTable};
