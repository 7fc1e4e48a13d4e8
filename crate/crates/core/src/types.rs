//! Shared domain types: vectors, algorithm parameters, the objective
//! interface and per-iteration records.

use nalgebra::DVector;

use crate::error::{GsError, Result};

/// A point, direction or gradient in R^n.
pub type Vector = DVector<f64>;

/// Builds a [`Vector`] from a slice.
pub fn vector(components: &[f64]) -> Vector {
    DVector::from_column_slice(components)
}

/// Parameters of the gradient sampling method.
///
/// The first nine fields are the tolerances, radii, sample size and
/// line-search/reduction factors of the method itself; the rest bound the
/// work a finite run is allowed to do.
#[derive(Debug, Clone, PartialEq)]
pub struct GsParams {
    /// Sampling-radius tolerance.
    pub eps_opt: f64,
    /// Stationarity tolerance.
    pub nu_opt: f64,
    /// Initial sampling radius, strictly above `eps_opt`.
    pub eps0: f64,
    /// Initial stationarity target, at least `nu_opt`.
    pub nu0: f64,
    /// Number of sampled points per iteration, at least `n + 1`.
    pub m: usize,
    /// Sufficient-decrease parameter.
    pub beta: f64,
    /// Backtracking factor.
    pub gamma: f64,
    pub theta_eps: f64,
    pub theta_nu: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    pub max_perturb_attempts: usize,
    pub seed: u64,
    /// Objective values below this are taken as evidence of `f -> -inf`.
    pub divergence_floor: f64,
    /// Re-draw sample points that miss the smooth set instead of stopping.
    pub resample_outside_domain: bool,
}

impl GsParams {
    /// Default parameters for an `n`-dimensional problem.
    pub fn for_dim(n: usize) -> Self {
        GsParams {
            eps_opt: 1e-6,
            nu_opt: 1e-6,
            eps0: 0.1,
            nu0: 0.1,
            m: 2 * n.max(1),
            beta: 1e-4,
            gamma: 0.5,
            theta_eps: 0.1,
            theta_nu: 0.1,
            max_iter: 10_000,
            max_backtracks: 60,
            max_perturb_attempts: 100,
            seed: 0,
            divergence_floor: -1e12,
            resample_outside_domain: false,
        }
    }

    /// Checks every range constraint of the general regime for dimension `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        self.validate_common(n)?;
        check(self.eps0 > self.eps_opt, "eps0", "eps0 > eps_opt")?;
        check(in_half_open(self.theta_eps), "theta_eps", "theta_eps in (0,1]")?;
        check(in_half_open(self.theta_nu), "theta_nu", "theta_nu in (0,1]")?;
        Ok(())
    }

    /// Checks the fixed-radius regime: `eps_opt = eps0 > 0`,
    /// `nu_opt = nu0 = 0` and `theta_eps = 1`.
    ///
    /// `theta_nu` only ever multiplies a zero target here, so any value in
    /// `[0,1]` is accepted.
    pub fn validate_fixed_radius(&self, n: usize) -> Result<()> {
        self.validate_common(n)?;
        check(self.eps0 > 0.0, "eps0", "eps0 > 0")?;
        check(self.eps_opt == self.eps0, "eps_opt", "eps_opt = eps0")?;
        check(self.nu0 == 0.0, "nu0", "nu0 = 0")?;
        check(self.nu_opt == 0.0, "nu_opt", "nu_opt = 0")?;
        check(self.theta_eps == 1.0, "theta_eps", "theta_eps = 1")?;
        check(
            (0.0..=1.0).contains(&self.theta_nu),
            "theta_nu",
            "theta_nu in [0,1]",
        )?;
        Ok(())
    }

    fn validate_common(&self, n: usize) -> Result<()> {
        check(n >= 1, "n", "n >= 1")?;
        check(
            self.eps_opt.is_finite() && self.eps_opt >= 0.0,
            "eps_opt",
            "eps_opt >= 0",
        )?;
        check(
            self.nu_opt.is_finite() && self.nu_opt >= 0.0,
            "nu_opt",
            "nu_opt >= 0",
        )?;
        check(self.eps0.is_finite(), "eps0", "eps0 finite")?;
        check(
            self.nu0.is_finite() && self.nu0 >= self.nu_opt,
            "nu0",
            "nu0 >= nu_opt",
        )?;
        check(self.m > n, "m", "m >= n+1")?;
        check(in_open(self.beta), "beta", "beta in (0,1)")?;
        check(in_open(self.gamma), "gamma", "gamma in (0,1)")?;
        check(self.max_iter >= 1, "max_iter", "max_iter >= 1")?;
        check(
            self.max_backtracks >= 1,
            "max_backtracks",
            "max_backtracks >= 1",
        )?;
        check(
            self.max_perturb_attempts >= 1,
            "max_perturb_attempts",
            "max_perturb_attempts >= 1",
        )?;
        check(
            !self.divergence_floor.is_nan(),
            "divergence_floor",
            "divergence_floor is a number",
        )?;
        Ok(())
    }
}

fn in_open(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

fn in_half_open(v: f64) -> bool {
    v > 0.0 && v <= 1.0
}

fn check(ok: bool, name: &'static str, constraint: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(GsError::ParameterOutOfRange { name, constraint })
    }
}

/// A real-valued function, continuously differentiable on an open set of
/// full measure (the "smooth set").
///
/// `grad` is only called at points where `in_smooth_set` returns true.
/// Implementations must be pure.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &Vector) -> f64;
    fn grad(&self, x: &Vector) -> Vector;
    fn in_smooth_set(&self, x: &Vector) -> bool;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        (**self).eval(x)
    }
    fn grad(&self, x: &Vector) -> Vector {
        (**self).grad(x)
    }
    fn in_smooth_set(&self, x: &Vector) -> bool {
        (**self).in_smooth_set(x)
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        (**self).eval(x)
    }
    fn grad(&self, x: &Vector) -> Vector {
        (**self).grad(x)
    }
    fn in_smooth_set(&self, x: &Vector) -> bool {
        (**self).in_smooth_set(x)
    }
}

/// Evaluates `f` and rejects non-finite values.
pub(crate) fn eval_checked<F: Objective + ?Sized>(f: &F, x: &Vector) -> Result<f64> {
    let value = f.eval(x);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(GsError::NonFiniteObjective {
            value,
            point: x.as_slice().to_vec(),
        })
    }
}

pub(crate) fn grad_checked<F: Objective + ?Sized>(f: &F, x: &Vector) -> Result<Vector> {
    let g = f.grad(x);
    if g.len() != x.len() {
        return Err(GsError::DimensionMismatch {
            expected: x.len(),
            got: g.len(),
        });
    }
    if g.iter().all(|c| c.is_finite()) {
        Ok(g)
    } else {
        Err(GsError::NonFiniteGradient {
            point: x.as_slice().to_vec(),
        })
    }
}

/// What an iteration did with its min-norm element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    /// `||g|| <= nu_k`: radius and target were shrunk, `x` unchanged.
    Reduction,
    /// A backtracking step along `-g/||g||` was taken.
    LineSearch,
    /// The iteration met a stopping test; nothing was updated.
    Terminal,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Reduction => "Reduction",
            StepKind::LineSearch => "LineSearch",
            StepKind::Terminal => "Terminal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Iterate at the start of the iteration.
    pub x: Vector,
    pub f_val: f64,
    pub eps_k: f64,
    pub nu_k: f64,
    /// Min-norm element of the sampled gradient hull.
    pub g: Vector,
    pub g_norm: f64,
    pub step_kind: StepKind,
    pub t_k: f64,
    /// Whether the next iterate had to be moved off a nonsmooth point.
    pub perturbed: bool,
    pub sample_count: usize,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminationStatus {
    GradientZero,
    ToleranceMet,
    SampleOutsideDomain,
    LineSearchFailed,
    MaxIterations,
    ObjectiveDiverging,
}

impl TerminationStatus {
    pub const ALL: [TerminationStatus; 6] = [
        TerminationStatus::GradientZero,
        TerminationStatus::ToleranceMet,
        TerminationStatus::SampleOutsideDomain,
        TerminationStatus::LineSearchFailed,
        TerminationStatus::MaxIterations,
        TerminationStatus::ObjectiveDiverging,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TerminationStatus::GradientZero => "GradientZero",
            TerminationStatus::ToleranceMet => "ToleranceMet",
            TerminationStatus::SampleOutsideDomain => "SampleOutsideDomain",
            TerminationStatus::LineSearchFailed => "LineSearchFailed",
            TerminationStatus::MaxIterations => "MaxIterations",
            TerminationStatus::ObjectiveDiverging => "ObjectiveDiverging",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.as_str() == s)
    }
}

impl std::fmt::Display for TerminationStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
