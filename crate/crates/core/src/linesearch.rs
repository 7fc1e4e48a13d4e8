//! Backtracking with a strict sufficient-decrease test, and the random move
//! off nondifferentiable trial points.

use crate::error::Result;
use crate::sampling::{sample_one, RngStream};
use crate::types::{eval_checked, Objective, Vector};

/// Largest `t` in `{1, gamma, gamma^2, ..., gamma^max_backtracks}` with
/// `f(x + t d) < f(x) - beta * t * g_norm`, or `None` if no grid point passes.
///
/// `d` is expected to be a unit vector.
pub fn armijo_backtrack<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    d: &Vector,
    g_norm: f64,
    beta: f64,
    gamma: f64,
    max_backtracks: usize,
) -> Result<Option<f64>> {
    let fx = eval_checked(f, x)?;
    let mut t = 1.0;
    for _ in 0..=max_backtracks {
        let trial = x + d * t;
        if eval_checked(f, &trial)? < fx - beta * t * g_norm {
            return Ok(Some(t));
        }
        t *= gamma;
    }
    Ok(None)
}

/// Returns `x_cand` if `f` is differentiable there. Otherwise draws points
/// uniformly from the ball of radius `min(t, eps)` around `x_cand` until one
/// is smooth and keeps `f < f(x_old) - beta * t * g_norm`; gives up after
/// `max_attempts` draws.
#[allow(clippy::too_many_arguments)]
pub fn perturb_if_nondifferentiable<F: Objective + ?Sized>(
    f: &F,
    x_old: &Vector,
    x_cand: &Vector,
    t: f64,
    eps: f64,
    g_norm: f64,
    beta: f64,
    rng: &mut RngStream,
    max_attempts: usize,
) -> Result<Option<Vector>> {
    if f.in_smooth_set(x_cand) {
        return Ok(Some(x_cand.clone()));
    }
    let bound = eval_checked(f, x_old)? - beta * t * g_norm;
    let radius = t.min(eps);
    for _ in 0..max_attempts {
        let y = sample_one(x_cand, radius, rng);
        if f.in_smooth_set(&y) && eval_checked(f, &y)? < bound {
            return Ok(Some(y));
        }
    }
    Ok(None)
}
