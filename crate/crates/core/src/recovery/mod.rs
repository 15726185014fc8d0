//! Case-specific recovery pipelines and the projection machinery they share.

mod bounds;
mod pipelines;
mod projection;

pub use bounds::{check_projection_bounds, ProjectionBounds};
pub use pipelines::{
    recover_case_i, recover_case_ii_e, recover_case_ii_x, recover_case_iii, recover_case_iv,
    Method, Recovered, RecoveryOptions,
};
pub use projection::{ComplementProjector, DegeneratePolicy, ProjectedSystem, DEGENERATE_TOL};
