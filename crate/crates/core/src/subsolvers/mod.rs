//! Inner solvers composed by the outer iterations.

mod active_set;
mod binary;
mod l1;
mod lstsq;
mod projection;
mod relaxed;

pub use binary::{solve_binary_ot, BinarySolution, BINARY_OT_GUARD};
pub use l1::{solve_l1_baseline, L1Settings, L1Solution};
pub use lstsq::{least_squares_on_support, min_norm_least_squares};
pub use projection::{capped_simplex_violation, project_capped_simplex};
pub use relaxed::{solve_relaxed_ot, QpSettings, QpStatus, RelaxedWeight};
