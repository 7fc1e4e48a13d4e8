//! Diagnostics around the method: the sampled criticality measure, hulls of
//! sampled gradients over shrinking balls, cone pointedness, the polar
//! interior test, the degeneracy test on analytic models, and a heuristic
//! mapping from finite runs to the asymptotic convergence outcomes.

use crate::error::{GsError, Result};
use crate::minnorm::{
    min_norm_generalized, min_norm_point, MinNormResult, Polytope, Projection,
    SubdifferentialModel, DEFAULT_TOL,
};
use crate::sampling::{sample_smooth_points, RngStream};
use crate::solver::RunTrace;
use crate::types::{grad_checked, Objective, TerminationStatus, Vector};

/// Upper estimate of `rho_eps(x) = dist(0, G_eps(x))` from `n_samples`
/// gradients drawn uniformly in the `eps`-ball (misses of the smooth set are
/// re-drawn).
///
/// The hull of finitely many sampled gradients sits inside `G_eps(x)`, so the
/// estimate can only overshoot; it tightens as `n_samples` grows.
pub fn rho_estimate<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    eps: f64,
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    Ok(sampled_hull(f, x, eps, n_samples, rng)?.0.norm)
}

fn sampled_hull<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    eps: f64,
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<(MinNormResult, Vec<Vector>)> {
    if !(eps > 0.0) {
        return Err(GsError::ParameterOutOfRange {
            name: "eps",
            constraint: "eps > 0",
        });
    }
    if n_samples == 0 {
        return Err(GsError::ParameterOutOfRange {
            name: "n_samples",
            constraint: "n_samples >= 1",
        });
    }
    let points = sample_smooth_points(f, x, eps, n_samples, rng)?;
    let grads = points
        .iter()
        .map(|p| grad_checked(f, p))
        .collect::<Result<Vec<_>>>()?;
    let mn = min_norm_point(&Polytope::new(grads.clone())?, DEFAULT_TOL)?;
    Ok((mn, grads))
}

/// Whether `cone(W)` contains no line, decided by checking that the hull of
/// the normalized generators stays more than `tol` away from the origin.
pub fn pointedness_check(generators: &[Vector], tol: f64) -> Result<bool> {
    if generators.is_empty() {
        return Ok(true);
    }
    let normalized = generators.iter().map(|w| w / w.norm()).collect();
    let r = min_norm_point(&Polytope::new(normalized)?, DEFAULT_TOL)?;
    Ok(r.norm > tol)
}

/// `z` lies in the interior of the polar of `cone(W)` iff `<z, w> < 0` for
/// every generator. The polar of the trivial cone is everything.
pub fn polar_interior_member(z: &Vector, generators: &[Vector]) -> bool {
    generators.iter().all(|w| z.dot(w) < 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    StationaryClarke,
    NondegenerateDescent,
    DegenerateDirection,
    EmptySubdifferential,
}

impl Degeneracy {
    pub fn as_str(self) -> &'static str {
        match self {
            Degeneracy::StationaryClarke => "StationaryClarke",
            Degeneracy::NondegenerateDescent => "NondegenerateDescent",
            Degeneracy::DegenerateDirection => "DegenerateDirection",
            Degeneracy::EmptySubdifferential => "EmptySubdifferential",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub subdiff_empty: bool,
    pub contains_zero: bool,
    /// Projection of the origin onto the model, when the model is nonempty.
    pub proj: Option<Vector>,
    /// Whether `-proj` is interior to the polar of the horizon cone.
    pub neg_proj_interior: bool,
    pub classification: Degeneracy,
}

/// Tests the three nondegeneracy conditions at a point with an analytic
/// model: nonempty subdifferential, origin outside it, and the negated
/// projection of the origin interior to the polar of the horizon cone.
pub fn degeneracy_report(m: &SubdifferentialModel, tol: f64) -> Result<DegeneracyReport> {
    let r = match min_norm_generalized(m, tol)? {
        Projection::Infeasible => {
            return Ok(DegeneracyReport {
                subdiff_empty: true,
                contains_zero: false,
                proj: None,
                neg_proj_interior: false,
                classification: Degeneracy::EmptySubdifferential,
            })
        }
        Projection::Found(r) => r,
    };
    let contains_zero = r.norm <= tol;
    let neg_proj_interior = polar_interior_member(&-&r.point, m.cone_generators());
    let classification = if contains_zero {
        Degeneracy::StationaryClarke
    } else if neg_proj_interior {
        Degeneracy::NondegenerateDescent
    } else {
        Degeneracy::DegenerateDirection
    };
    Ok(DegeneracyReport {
        subdiff_empty: false,
        contains_zero,
        proj: Some(r.point),
        neg_proj_interior,
        classification,
    })
}

/// Per-coordinate extent of a set of sampled gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct HullSummary {
    pub count: usize,
    pub coord_min: Vec<f64>,
    pub coord_max: Vec<f64>,
}

impl HullSummary {
    fn of(grads: &[Vector]) -> Self {
        let n = grads[0].len();
        let mut coord_min = vec![f64::INFINITY; n];
        let mut coord_max = vec![f64::NEG_INFINITY; n];
        for g in grads {
            for i in 0..n {
                coord_min[i] = coord_min[i].min(g[i]);
                coord_max[i] = coord_max[i].max(g[i]);
            }
        }
        HullSummary {
            count: grads.len(),
            coord_min,
            coord_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxRow {
    pub delta: f64,
    pub min_norm: MinNormResult,
    pub hull: HullSummary,
}

/// Samples the gradient hull over each ball `x + delta B` and reports its
/// min-norm element and extent, for `delta` running down a strictly
/// decreasing list.
pub fn subdiff_approx_experiment<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    deltas: &[f64],
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<Vec<ApproxRow>> {
    let decreasing = deltas.windows(2).all(|w| w[1] < w[0]);
    if !decreasing || deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(GsError::ParameterOutOfRange {
            name: "deltas",
            constraint: "positive and strictly decreasing",
        });
    }
    deltas
        .iter()
        .map(|&delta| {
            let (min_norm, grads) = sampled_hull(f, x, delta, n_samples, rng)?;
            Ok(ApproxRow {
                delta,
                min_norm,
                hull: HullSummary::of(&grads),
            })
        })
        .collect()
}

/// Finite-run reading of the four asymptotic outcomes.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    A_TerminatedStationary,
    B_Diverging,
    C_StalledTarget,
    D_TargetToZero,
    Inconclusive,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::A_TerminatedStationary => "A_TerminatedStationary",
            Outcome::B_Diverging => "B_Diverging",
            Outcome::C_StalledTarget => "C_StalledTarget",
            Outcome::D_TargetToZero => "D_TargetToZero",
            Outcome::Inconclusive => "Inconclusive",
        }
    }
}

/// Thresholds for [`classify_outcome`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    /// Trailing iterations inspected for a stalled target.
    pub window: usize,
    /// Total iterate movement over the window below which the run counts as
    /// converged to a point.
    pub displacement_tol: f64,
    pub nu_floor: f64,
    pub min_reductions: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            window: 200,
            displacement_tol: 1e-8,
            nu_floor: 1e-8,
            min_reductions: 10,
        }
    }
}

/// Heuristic: a finite run cannot certify an asymptotic outcome.
///
/// * A: stopped at the stationarity test.
/// * B: objective fell below the divergence floor.
/// * D: the target was reduced at least `min_reductions` times and fell
///   below `nu_floor`.
/// * C: over the last `window` records the target stayed fixed above
///   `nu_floor`, `||g^k||` stayed above it, and the iterates moved less than
///   `displacement_tol` in total.
pub fn classify_outcome(trace: &RunTrace, cfg: &ClassifierConfig) -> Outcome {
    match trace.status {
        TerminationStatus::GradientZero | TerminationStatus::ToleranceMet => {
            return Outcome::A_TerminatedStationary
        }
        TerminationStatus::ObjectiveDiverging => return Outcome::B_Diverging,
        _ => {}
    }
    let Some(last) = trace.records.last() else {
        return Outcome::Inconclusive;
    };

    if trace.reductions() >= cfg.min_reductions && last.nu_k < cfg.nu_floor {
        return Outcome::D_TargetToZero;
    }

    let len = trace.records.len();
    if cfg.window > 0 && len >= cfg.window && last.nu_k >= cfg.nu_floor {
        let start = len - cfg.window;
        let tail = &trace.records[start..];
        let nu = tail[0].nu_k;
        let stalled = tail.iter().all(|r| r.nu_k == nu && r.g_norm > nu);
        let moved: f64 = (start..len)
            .map(|i| (trace.next_x(i) - &trace.records[i].x).norm())
            .sum();
        if stalled && moved < cfg.displacement_tol {
            return Outcome::C_StalledTarget;
        }
    }
    Outcome::Inconclusive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::vector;

    fn vs(v: &[&[f64]]) -> Vec<Vector> {
        v.iter().map(|x| vector(x)).collect()
    }

    #[test]
    fn pointedness_examples() {
        assert!(pointedness_check(&vs(&[&[1.0, 0.0], &[0.0, 1.0]]), 1e-9).unwrap());
        assert!(!pointedness_check(&vs(&[&[1.0, 0.0], &[-1.0, 0.0]]), 1e-9).unwrap());
        let w = vs(&[&[1.0, 0.0], &[-1.0, 1.0], &[-1.0, -1.0]]);
        assert!(!pointedness_check(&w, 1e-9).unwrap());
    }

    #[test]
    fn vanishing_combination_of_normalized_generators() {
        // lambda = (sqrt2, 1, 1) / (2 + sqrt2) on (1,0), (-1,1)/sqrt2, (-1,-1)/sqrt2
        let s2 = 2f64.sqrt();
        let lam = [s2 / (2.0 + s2), 1.0 / (2.0 + s2), 1.0 / (2.0 + s2)];
        let gens = vs(&[&[1.0, 0.0], &[-1.0, 1.0], &[-1.0, -1.0]]);
        let combo = gens
            .iter()
            .zip(lam)
            .fold(vector(&[0.0, 0.0]), |acc, (w, l)| acc + w / w.norm() * l);
        assert!(combo.norm() < 1e-15);
        assert!((lam.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polar_interior_examples() {
        let w = vs(&[&[-1.0, 0.0], &[0.0, -1.0]]);
        assert!(!polar_interior_member(&vector(&[1.0, 0.0]), &w));
        assert!(polar_interior_member(&vector(&[1.0, 0.5]), &w));
        assert!(polar_interior_member(&vector(&[-3.0, 7.0]), &[]));
    }

    fn model(v: &[&[f64]], w: &[&[f64]]) -> SubdifferentialModel {
        SubdifferentialModel::new(2, vs(v), vs(w)).unwrap()
    }

    #[test]
    fn degeneracy_examples() {
        let orthant: &[&[f64]] = &[&[-1.0, 0.0], &[0.0, -1.0]];
        let r = degeneracy_report(&model(&[&[-1.0, 0.5]], orthant), DEFAULT_TOL).unwrap();
        assert_eq!(r.classification, Degeneracy::DegenerateDirection);
        assert_eq!(r.proj, Some(vector(&[-1.0, 0.0])));

        let r = degeneracy_report(&model(&[&[-1.0, -0.5]], orthant), DEFAULT_TOL).unwrap();
        assert_eq!(r.classification, Degeneracy::NondegenerateDescent);

        let r = degeneracy_report(&model(&[&[1.0, 0.0], &[-1.0, 0.0]], &[]), DEFAULT_TOL).unwrap();
        assert_eq!(r.classification, Degeneracy::StationaryClarke);
        assert!(r.contains_zero);

        let r = degeneracy_report(&model(&[], orthant), DEFAULT_TOL).unwrap();
        assert_eq!(r.classification, Degeneracy::EmptySubdifferential);
        assert!(r.subdiff_empty && r.proj.is_none());
    }

    #[test]
    fn deltas_must_decrease() {
        struct Lin;
        impl Objective for Lin {
            fn dim(&self) -> usize {
                1
            }
            fn eval(&self, x: &Vector) -> f64 {
                x[0]
            }
            fn grad(&self, _: &Vector) -> Vector {
                vector(&[1.0])
            }
            fn in_smooth_set(&self, _: &Vector) -> bool {
                true
            }
        }
        let mut rng = RngStream::new(0, 0);
        let x = vector(&[0.0]);
        assert!(subdiff_approx_experiment(&Lin, &x, &[0.1, 0.1], 5, &mut rng).is_err());
        assert!(subdiff_approx_experiment(&Lin, &x, &[0.1, -0.1], 5, &mut rng).is_err());
        let rows = subdiff_approx_experiment(&Lin, &x, &[0.2, 0.1], 5, &mut rng).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].hull.coord_min, vec![1.0]);
    }
}
