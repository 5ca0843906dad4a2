//! Numerical building blocks shared by the analytic modules.

mod det;
mod factorial;
mod quad;

pub use det::{log_det, log_det_sensitivity, LogDet, LogTerm};
pub use factorial::{ln_factorial, pochhammer};
pub use quad::GaussLegendre;
