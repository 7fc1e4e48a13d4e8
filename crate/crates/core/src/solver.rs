//! The gradient sampling main loop.
//!
//! Each iteration samples `m` points in the `eps_k`-ball around `x^k`, takes
//! the min-norm element `g^k` of the hull of their gradients (plus the
//! gradient at `x^k`), and then either
//!
//! * stops, if `grad f(x^k) = 0` or `||g^k|| <= nu_opt` with
//!   `eps_k <= eps_opt`;
//! * shrinks radius and target together, if `||g^k|| <= nu_k`;
//! * otherwise backtracks along `-g^k/||g^k||` and, if the accepted point is
//!   not a point of differentiability, moves it randomly to a nearby one that
//!   keeps the sufficient decrease.

use std::time::{Duration, Instant};

use crate::error::{GsError, Result};
use crate::linesearch::{armijo_backtrack, perturb_if_nondifferentiable};
use crate::minnorm::{min_norm_point, Polytope, DEFAULT_TOL};
use crate::sampling::{build_cloud, DomainPolicy, RngStream};
use crate::types::{
    eval_checked, GsParams, IterationRecord, Objective, StepKind, TerminationStatus, Vector,
};

/// Iterate, objective value, and the coupled radius/target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub k: usize,
    pub x: Vector,
    pub f_val: f64,
    pub eps: f64,
    pub nu: f64,
}

impl SolverState {
    pub fn initial<F: Objective + ?Sized>(f: &F, x0: Vector, p: &GsParams) -> Result<Self> {
        let f_val = eval_checked(f, &x0)?;
        Ok(SolverState {
            k: 0,
            x: x0,
            f_val,
            eps: p.eps0,
            nu: p.nu0,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IterationOutcome {
    Continue(SolverState, IterationRecord),
    /// The record is present when the stop happened after `g^k` was formed.
    Stop(TerminationStatus, Option<IterationRecord>),
}

fn domain_policy(p: &GsParams) -> DomainPolicy {
    if p.resample_outside_domain {
        DomainPolicy::Resample {
            max_attempts: p.max_perturb_attempts,
        }
    } else {
        DomainPolicy::Strict
    }
}

/// One pass through the loop body.
pub fn gs_iteration<F: Objective + ?Sized>(
    f: &F,
    state: &SolverState,
    p: &GsParams,
    rng: &mut RngStream,
) -> Result<IterationOutcome> {
    let cloud = match build_cloud(f, &state.x, state.eps, p.m, rng, domain_policy(p)) {
        Ok(c) => c,
        Err(GsError::SampleOutsideDomain { .. }) => {
            return Ok(IterationOutcome::Stop(
                TerminationStatus::SampleOutsideDomain,
                None,
            ))
        }
        Err(e) => return Err(e),
    };
    let center_grad_zero = cloud.gradients[0].iter().all(|&c| c == 0.0);
    let sample_count = cloud.sample_points.len();
    let hull = Polytope::new(cloud.gradients)?;
    let g = min_norm_point(&hull, DEFAULT_TOL)?.point;
    let g_norm = g.norm();

    let record = |step_kind, t_k, perturbed| IterationRecord {
        k: state.k,
        x: state.x.clone(),
        f_val: state.f_val,
        eps_k: state.eps,
        nu_k: state.nu,
        g: g.clone(),
        g_norm,
        step_kind,
        t_k,
        perturbed,
        sample_count,
    };

    if center_grad_zero {
        return Ok(IterationOutcome::Stop(
            TerminationStatus::GradientZero,
            Some(record(StepKind::Terminal, 0.0, false)),
        ));
    }
    if g_norm <= p.nu_opt && state.eps <= p.eps_opt {
        return Ok(IterationOutcome::Stop(
            TerminationStatus::ToleranceMet,
            Some(record(StepKind::Terminal, 0.0, false)),
        ));
    }

    if g_norm <= state.nu {
        let next = SolverState {
            k: state.k + 1,
            x: state.x.clone(),
            f_val: state.f_val,
            eps: p.theta_eps * state.eps,
            nu: p.theta_nu * state.nu,
        };
        return Ok(IterationOutcome::Continue(
            next,
            record(StepKind::Reduction, 0.0, false),
        ));
    }

    let d = -&g / g_norm;
    let Some(t) = armijo_backtrack(f, &state.x, &d, g_norm, p.beta, p.gamma, p.max_backtracks)?
    else {
        return Ok(IterationOutcome::Stop(
            TerminationStatus::LineSearchFailed,
            None,
        ));
    };
    let x_cand = &state.x + &d * t;
    let perturbed = !f.in_smooth_set(&x_cand);
    let Some(x_new) = perturb_if_nondifferentiable(
        f,
        &state.x,
        &x_cand,
        t,
        state.eps,
        g_norm,
        p.beta,
        rng,
        p.max_perturb_attempts,
    )?
    else {
        return Ok(IterationOutcome::Stop(
            TerminationStatus::LineSearchFailed,
            None,
        ));
    };
    let f_new = eval_checked(f, &x_new)?;
    let next = SolverState {
        k: state.k + 1,
        x: x_new,
        f_val: f_new,
        eps: state.eps,
        nu: state.nu,
    };
    Ok(IterationOutcome::Continue(
        next,
        record(StepKind::LineSearch, t, perturbed),
    ))
}

/// Full record of a run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub status: TerminationStatus,
    pub final_x: Vector,
    pub final_f: f64,
    pub wall_time: Duration,
}

impl RunTrace {
    /// `sum_k t_k ||g^k||`; scaled by `beta` it bounds the total decrease.
    pub fn step_sum(&self) -> f64 {
        self.records.iter().map(|r| r.t_k * r.g_norm).sum()
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Iterate following record `i`.
    pub fn next_x(&self, i: usize) -> &Vector {
        self.records
            .get(i + 1)
            .map(|r| &r.x)
            .unwrap_or(&self.final_x)
    }

    /// Number of radius/target reductions in the run.
    pub fn reductions(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.step_kind == StepKind::Reduction)
            .count()
    }

    /// Equality on everything except wall time.
    pub fn same_path(&self, other: &RunTrace) -> bool {
        self.records == other.records
            && self.status == other.status
            && self.final_x == other.final_x
            && self.final_f.to_bits() == other.final_f.to_bits()
    }
}

/// Runs the method in the general regime (`eps_k` and `nu_k` may shrink).
pub fn gs_solve<F: Objective + ?Sized>(f: &F, x0: &Vector, p: &GsParams) -> Result<RunTrace> {
    p.validate(f.dim())?;
    run(f, x0, p)
}

/// Runs the method with a fixed sampling radius: `eps_opt = eps0 > 0`,
/// `nu_opt = nu0 = 0`, `theta_eps = 1`. The run can only stop at the
/// stationarity test when `g^k = 0` exactly.
pub fn gs_solve_fixed_radius<F: Objective + ?Sized>(
    f: &F,
    x0: &Vector,
    p: &GsParams,
) -> Result<RunTrace> {
    p.validate_fixed_radius(f.dim())?;
    run(f, x0, p)
}

fn run<F: Objective + ?Sized>(f: &F, x0: &Vector, p: &GsParams) -> Result<RunTrace> {
    if x0.len() != f.dim() {
        return Err(GsError::DimensionMismatch {
            expected: f.dim(),
            got: x0.len(),
        });
    }
    if !f.in_smooth_set(x0) {
        return Err(GsError::StartNotSmooth {
            point: x0.as_slice().to_vec(),
        });
    }
    let started = Instant::now();
    let mut state = SolverState::initial(f, x0.clone(), p)?;
    let mut records = Vec::new();
    let mut status = TerminationStatus::MaxIterations;

    for k in 0..p.max_iter {
        let mut rng = RngStream::new(p.seed, k as u64);
        match gs_iteration(f, &state, p, &mut rng)? {
            IterationOutcome::Continue(next, rec) => {
                records.push(rec);
                state = next;
                if state.f_val < p.divergence_floor {
                    status = TerminationStatus::ObjectiveDiverging;
                    break;
                }
            }
            IterationOutcome::Stop(st, rec) => {
                records.extend(rec);
                status = st;
                break;
            }
        }
    }

    Ok(RunTrace {
        records,
        status,
        final_x: state.x,
        final_f: state.f_val,
        wall_time: started.elapsed(),
    })
}
