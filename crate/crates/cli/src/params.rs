use clap::Args;
use gradsamp::GsParams;
use serde::{Deserialize, Serialize};

/// Parameter overrides, read from flags or from a suite entry. Unset fields
/// fall through to the next source.
#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    #[arg(long)]
    pub eps_opt: Option<f64>,
    #[arg(long)]
    pub nu_opt: Option<f64>,
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long)]
    pub nu0: Option<f64>,
    /// Sampled points per iteration (default 2n).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub theta_eps: Option<f64>,
    #[arg(long)]
    pub theta_nu: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub max_backtracks: Option<usize>,
    #[arg(long)]
    pub max_perturb_attempts: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub divergence_floor: Option<f64>,
    /// Redraw sample points that land on the nonsmooth set instead of
    /// stopping.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub resample_outside_domain: Option<bool>,
    /// Keep the sampling radius fixed at eps0 and stop only when the sampled
    /// hull contains 0.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub fixed_radius: Option<bool>,
}

macro_rules! merge_fields {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        ParamOverrides { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl ParamOverrides {
    /// Fields set in `self` win over those in `lower`.
    pub fn over(&self, lower: &ParamOverrides) -> ParamOverrides {
        merge_fields!(
            self, lower, eps_opt, nu_opt, eps0, nu0, m, beta, gamma, theta_eps, theta_nu, max_iter,
            max_backtracks, max_perturb_attempts, divergence_floor, resample_outside_domain,
            fixed_radius
        )
    }

    pub fn fixed_radius(&self) -> bool {
        self.fixed_radius.unwrap_or(false)
    }

    /// Effective parameters for dimension `n`. In fixed-radius mode the
    /// defaults change to `eps_opt = eps0`, `nu0 = nu_opt = 0`,
    /// `theta_eps = 1`, `theta_nu = 0`; explicit values still win.
    pub fn resolve(&self, n: usize, seed: u64) -> GsParams {
        let mut p = GsParams::for_dim(n);
        if self.fixed_radius() {
            p.nu0 = 0.0;
            p.nu_opt = 0.0;
            p.theta_eps = 1.0;
            p.theta_nu = 0.0;
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { p.$f = v; })* };
        }
        set!(
            eps_opt, nu_opt, eps0, nu0, m, beta, gamma, theta_eps, theta_nu, max_iter,
            max_backtracks, max_perturb_attempts, divergence_floor, resample_outside_domain
        );
        if self.fixed_radius() && self.eps_opt.is_none() {
            p.eps_opt = p.eps0;
        }
        p.seed = seed;
        p
    }
}

/// Serializable copy of [`GsParams`] for trace headers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub eps_opt: f64,
    pub nu_opt: f64,
    pub eps0: f64,
    pub nu0: f64,
    pub m: usize,
    pub beta: f64,
    pub gamma: f64,
    pub theta_eps: f64,
    pub theta_nu: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    pub max_perturb_attempts: usize,
    pub seed: u64,
    pub divergence_floor: f64,
    pub resample_outside_domain: bool,
}

impl From<&GsParams> for ParamsEcho {
    fn from(p: &GsParams) -> Self {
        ParamsEcho {
            eps_opt: p.eps_opt,
            nu_opt: p.nu_opt,
            eps0: p.eps0,
            nu0: p.nu0,
            m: p.m,
            beta: p.beta,
            gamma: p.gamma,
            theta_eps: p.theta_eps,
            theta_nu: p.theta_nu,
            max_iter: p.max_iter,
            max_backtracks: p.max_backtracks,
            max_perturb_attempts: p.max_perturb_attempts,
            seed: p.seed,
            divergence_floor: p.divergence_floor,
            resample_outside_domain: p.resample_outside_domain,
        }
    }
}
