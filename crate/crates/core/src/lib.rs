//! Gradient sampling for nonsmooth objectives that need not be locally
//! Lipschitz, together with the geometric diagnostics that explain how such
//! runs end: min-norm points of gradient hulls, sampled criticality,
//! pointedness of horizon cones, and the degeneracy test at limit points.
//!
//! ```
//! use gradsamp::{gs_solve, testbed, vector, GsParams, Objective, TerminationStatus};
//!
//! let f = testbed::make_abs_sum(2);
//! let params = GsParams { eps_opt: 1e-4, nu_opt: 1e-4, ..GsParams::for_dim(f.dim()) };
//! let trace = gs_solve(&f, &vector(&[5.0, 7.0]), &params).unwrap();
//! assert_eq!(trace.status, TerminationStatus::ToleranceMet);
//! assert!(trace.final_x.norm() <= 1e-2);
//! ```

pub mod analysis;
pub mod error;
pub mod linesearch;
pub mod minnorm;
pub mod sampling;
pub mod solver;
pub mod testbed;
pub mod types;

pub use analysis::{
    classify_outcome, degeneracy_report, pointedness_check, polar_interior_member, rho_estimate,
    subdiff_approx_experiment, ClassifierConfig, Degeneracy, DegeneracyReport, Outcome,
};
pub use error::{GsError, Result};
pub use minnorm::{
    min_norm_generalized, min_norm_point, steepest_descent_direction, support_function, Descent,
    MinNormResult, Polytope, Projection, SubdifferentialModel,
};
pub use sampling::{
    build_cloud, nudge_into_smooth_set, sample_uniform_ball, DomainPolicy, GradientCloud, RngStream,
};
pub use solver::{gs_iteration, gs_solve, gs_solve_fixed_radius, IterationOutcome, RunTrace, SolverState};
pub use types::{
    vector, GsParams, IterationRecord, Objective, StepKind, TerminationStatus, Vector,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/min-norm.md")]
    mod min_norm {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/line-search.md")]
    mod line_search {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/testbed.md")]
    mod testbed {}
}
