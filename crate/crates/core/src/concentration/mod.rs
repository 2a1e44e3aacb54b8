//! Concentration and covariance bounds in the Dobrushin regime, checked
//! against exact or sampled window measures.

mod checks;
mod local;
mod matrices;

pub use checks::{
    concentration_constant, covariance_bound_check, gcb_check, moment_check, tail_check, write_reports_csv,
    CheckReport, Measure, RHAT_LIMIT,
};
pub use local::{delta_norm, LocalFunction};
pub use matrices::{probed_interdependence, DobrushinMatrices, InterdependenceEstimate, MatrixSummary, NEUMANN_TOLERANCE};
