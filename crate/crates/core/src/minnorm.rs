//! Minimum-norm points of polytopes `conv(V)` and of polyhedral sets
//! `conv(V) + cone(W)`.
//!
//! The solver is Wolfe's active-set method. Cone generators enter the
//! active set like vertices, except that their multipliers are free of the
//! unit-sum constraint; both kinds of multiplier are kept nonnegative by the
//! usual minor cycle. In exact arithmetic the active points stay affinely
//! independent (rays linearly independent of the affine directions), so
//! every subproblem is a small nonsingular KKT system.

use nalgebra::{DMatrix, DVector};

use crate::error::{GsError, Result};
use crate::types::Vector;

/// Default certification tolerance, relative to the largest squared norm
/// among the inputs.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Convex hull of a nonempty, dimension-consistent list of vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vector>,
}

impl Polytope {
    pub fn new(vertices: Vec<Vector>) -> Result<Self> {
        let first = vertices.first().ok_or(GsError::EmptyPolytope)?;
        check_dims(first.len(), &vertices)?;
        Ok(Polytope { vertices })
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }
}

/// Polyhedral model `conv(V) + cone(W)` of a subdifferential.
///
/// An empty `V` models an empty subdifferential. `W` generates the horizon
/// cone and may not contain the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdifferentialModel {
    dim: usize,
    vertices: Vec<Vector>,
    cone_generators: Vec<Vector>,
}

impl SubdifferentialModel {
    pub fn new(dim: usize, vertices: Vec<Vector>, cone_generators: Vec<Vector>) -> Result<Self> {
        check_dims(dim, &vertices)?;
        check_dims(dim, &cone_generators)?;
        if cone_generators.iter().any(|w| w.iter().all(|&c| c == 0.0)) {
            return Err(GsError::ParameterOutOfRange {
                name: "cone_generators",
                constraint: "no zero generator",
            });
        }
        Ok(SubdifferentialModel {
            dim,
            vertices,
            cone_generators,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn cone_generators(&self) -> &[Vector] {
        &self.cone_generators
    }
}

fn check_dims(dim: usize, vs: &[Vector]) -> Result<()> {
    match vs.iter().find(|v| v.len() != dim) {
        Some(v) => Err(GsError::DimensionMismatch {
            expected: dim,
            got: v.len(),
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinNormResult {
    pub point: Vector,
    /// Convex weights over the vertices.
    pub simplex_coeffs: Vec<f64>,
    /// Nonnegative multipliers over the cone generators.
    pub cone_coeffs: Vec<f64>,
    pub norm: f64,
}

/// Outcome of projecting the origin onto a [`SubdifferentialModel`].
#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    Found(MinNormResult),
    /// The model has no vertices.
    Infeasible,
}

/// Steepest-descent direction derived from a model.
#[derive(Debug, Clone, PartialEq)]
pub enum Descent {
    Direction(Vector),
    AtStationary,
    Infeasible,
}

/// Minimizer of `0.5 * ||g||^2` over `conv(P)`.
pub fn min_norm_point(p: &Polytope, tol: f64) -> Result<MinNormResult> {
    wolfe(&p.vertices, &[], tol)
}

/// Minimizer of `0.5 * ||g||^2` over `conv(V) + cone(W)`.
pub fn min_norm_generalized(m: &SubdifferentialModel, tol: f64) -> Result<Projection> {
    if m.vertices.is_empty() {
        return Ok(Projection::Infeasible);
    }
    wolfe(&m.vertices, &m.cone_generators, tol).map(Projection::Found)
}

/// `max_{v in P} <d, v>`.
pub fn support_function(p: &Polytope, d: &Vector) -> f64 {
    p.vertices
        .iter()
        .map(|v| v.dot(d))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `-g / ||g||` for the min-norm element `g` of the model.
pub fn steepest_descent_direction(m: &SubdifferentialModel, tol: f64) -> Result<Descent> {
    match min_norm_generalized(m, tol)? {
        Projection::Infeasible => Ok(Descent::Infeasible),
        Projection::Found(r) if r.norm <= tol => Ok(Descent::AtStationary),
        Projection::Found(r) => Ok(Descent::Direction(-&r.point / r.norm)),
    }
}

/// Element of the working set: a vertex or a ray, by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Atom {
    Vertex(usize),
    Ray(usize),
}

struct Wolfe<'a> {
    vertices: &'a [Vector],
    rays: &'a [Vector],
    active: Vec<Atom>,
    coeffs: Vec<f64>,
}

impl<'a> Wolfe<'a> {
    fn atom(&self, a: Atom) -> &'a Vector {
        match a {
            Atom::Vertex(i) => &self.vertices[i],
            Atom::Ray(j) => &self.rays[j],
        }
    }

    fn combine(&self, coeffs: &[f64]) -> Vector {
        let n = self.vertices[0].len();
        let mut x = DVector::zeros(n);
        for (&a, &c) in self.active.iter().zip(coeffs) {
            x.axpy(c, self.atom(a), 1.0);
        }
        x
    }

    /// Minimizer of `||sum c_a p_a||` over the affine hull of the active
    /// vertices plus the span of the active rays.
    fn affine_minimizer(&self) -> Option<Vec<f64>> {
        let s = self.active.len();
        let mut kkt = DMatrix::zeros(s + 1, s + 1);
        for (i, &a) in self.active.iter().enumerate() {
            for (j, &b) in self.active.iter().enumerate().skip(i) {
                let g = self.atom(a).dot(self.atom(b));
                kkt[(i, j)] = g;
                kkt[(j, i)] = g;
            }
            if matches!(a, Atom::Vertex(_)) {
                kkt[(i, s)] = 1.0;
                kkt[(s, i)] = 1.0;
            }
        }
        let mut rhs = DVector::zeros(s + 1);
        rhs[s] = 1.0;

        let sol = kkt
            .clone()
            .lu()
            .solve(&rhs)
            .filter(|x| x.iter().all(|c| c.is_finite()))
            .or_else(|| kkt.svd(true, true).solve(&rhs, 1e-14).ok())?;
        let mut coeffs: Vec<f64> = sol.iter().take(s).copied().collect();

        // put the unit-sum constraint back exactly
        let sum: f64 = self
            .active
            .iter()
            .zip(&coeffs)
            .filter(|(a, _)| matches!(a, Atom::Vertex(_)))
            .map(|(_, c)| c)
            .sum();
        if !(sum.is_finite() && sum > 0.0) {
            return None;
        }
        if sum != 1.0 {
            for (a, c) in self.active.iter().zip(coeffs.iter_mut()) {
                if matches!(a, Atom::Vertex(_)) {
                    *c /= sum;
                }
            }
        }
        Some(coeffs)
    }

    /// Runs minor cycles until the working set's affine minimizer is strictly
    /// inside the cone of feasible multipliers. Returns false when a cycle
    /// removes the atom that was just added without moving (no progress).
    fn minor_cycles(&mut self, added: Atom) -> bool {
        loop {
            let alpha = match self.affine_minimizer() {
                Some(a) => a,
                None => return false,
            };
            if alpha.iter().all(|&a| a > 0.0) {
                self.coeffs = alpha;
                return true;
            }
            let mut theta = f64::INFINITY;
            for (&c, &a) in self.coeffs.iter().zip(&alpha) {
                if a <= 0.0 {
                    let ratio = c / (c - a);
                    if ratio < theta {
                        theta = ratio;
                    }
                }
            }
            let theta = theta.clamp(0.0, 1.0);
            for (c, a) in self.coeffs.iter_mut().zip(&alpha) {
                *c += theta * (a - *c);
            }
            // drop atoms whose multiplier reached zero, including the
            // blocking one even if rounding left it slightly positive
            let blocking = self
                .coeffs
                .iter()
                .zip(&alpha)
                .enumerate()
                .filter(|(_, (_, &a))| a <= 0.0)
                .min_by(|(_, (c1, _)), (_, (c2, _))| c1.total_cmp(c2))
                .map(|(i, _)| i);
            let mut keep = Vec::with_capacity(self.active.len());
            for (i, &c) in self.coeffs.iter().enumerate() {
                keep.push(c > 0.0 && Some(i) != blocking);
            }
            if theta == 0.0 && self.active.last() == Some(&added) && !keep[keep.len() - 1] {
                self.active.pop();
                self.coeffs.pop();
                return false;
            }
            let mut idx = 0;
            self.active.retain(|_| {
                idx += 1;
                keep[idx - 1]
            });
            let mut idx = 0;
            self.coeffs.retain(|_| {
                idx += 1;
                keep[idx - 1]
            });
            if !self.active.iter().any(|a| matches!(a, Atom::Vertex(_))) {
                return false;
            }
            let sum: f64 = self
                .active
                .iter()
                .zip(&self.coeffs)
                .filter(|(a, _)| matches!(a, Atom::Vertex(_)))
                .map(|(_, c)| c)
                .sum();
            for (a, c) in self.active.iter().zip(self.coeffs.iter_mut()) {
                if matches!(a, Atom::Vertex(_)) {
                    *c /= sum;
                }
            }
        }
    }
}

fn wolfe(vertices: &[Vector], rays: &[Vector], tol: f64) -> Result<MinNormResult> {
    if vertices.is_empty() {
        return Err(GsError::EmptyPolytope);
    }
    if !(tol > 0.0) {
        return Err(GsError::ParameterOutOfRange {
            name: "tol",
            constraint: "tol > 0",
        });
    }

    let scale = vertices
        .iter()
        .chain(rays)
        .map(|v| v.norm_squared())
        .fold(1.0f64, f64::max);
    let threshold = tol * scale;

    let start = vertices
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bn), (i, v)| {
            let n = v.norm_squared();
            if n < bn {
                (i, n)
            } else {
                (bi, bn)
            }
        })
        .0;
    let mut w = Wolfe {
        vertices,
        rays,
        active: vec![Atom::Vertex(start)],
        coeffs: vec![1.0],
    };

    let cap = 50 * (vertices.len() + rays.len()).max(1);
    let mut certified = false;
    for _ in 0..cap {
        let x = w.combine(&w.coeffs);
        let xx = x.norm_squared();
        if xx == 0.0 {
            certified = true;
            break;
        }

        let xn = xx.sqrt();
        let mut best: Option<(Atom, f64)> = None;
        let candidates = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (Atom::Vertex(i), xx - x.dot(v)))
            .chain(
                rays.iter()
                    .enumerate()
                    .map(|(j, r)| (Atom::Ray(j), -x.dot(r) * xn / r.norm())),
            );
        for (atom, viol) in candidates {
            if best.is_none_or(|(_, b)| viol > b) {
                best = Some((atom, viol));
            }
        }
        let (atom, viol) = best.expect("at least one vertex");
        if viol <= threshold {
            certified = true;
            break;
        }
        if w.active.contains(&atom) {
            certified = is_certified(&w, &x, threshold);
            break;
        }

        w.active.push(atom);
        w.coeffs.push(0.0);
        if !w.minor_cycles(atom) {
            let x = w.combine(&w.coeffs);
            certified = is_certified(&w, &x, threshold);
            break;
        }
    }

    if !certified {
        return Err(GsError::NumericalStall { iterations: cap });
    }

    let point = w.combine(&w.coeffs);
    let mut simplex_coeffs = vec![0.0; vertices.len()];
    let mut cone_coeffs = vec![0.0; rays.len()];
    for (&a, &c) in w.active.iter().zip(&w.coeffs) {
        match a {
            Atom::Vertex(i) => simplex_coeffs[i] = c,
            Atom::Ray(j) => cone_coeffs[j] = c,
        }
    }
    let norm = point.norm();
    Ok(MinNormResult {
        point,
        simplex_coeffs,
        cone_coeffs,
        norm,
    })
}

/// Loose acceptance for a working set that cannot make further progress in
/// floating point: the variational inequality holds up to a slack well above
/// rounding but far below any meaningful violation.
fn is_certified(w: &Wolfe<'_>, x: &Vector, threshold: f64) -> bool {
    let xx = x.norm_squared();
    let slack = threshold.max(1e-13 * (1.0 + xx));
    w.vertices.iter().all(|v| xx - x.dot(v) <= slack)
        && w.rays.iter().all(|r| -x.dot(r) <= slack * r.norm().max(1.0))
}
