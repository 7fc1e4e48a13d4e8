//! Objectives with analytic gradients, exact smooth-set predicates, and
//! polyhedral subdifferential models at selected points.
//!
//! Functions can be built directly or looked up by name with [`lookup`]:
//!
//! | name                   | function                                          |
//! |------------------------|---------------------------------------------------|
//! | `abs_sum:N`            | `sum_i |x_i|` in `R^N`                            |
//! | `cube_root:eta=E`      | `x^(1/3) -+ E` (jump of `2E` at 0)                |
//! | `tilted_root:beta=B`   | `<(-1,B), x> + dist(x, R^2_+)^(1/2)`              |
//! | `max_quad:N`           | `max_i 0.5 ||x - c_i||^2`, `c_i` in `{+-e_j}`     |
//! | `rosenbrock_ns`        | `8 |x_1^2 - x_2| + (1 - x_1)^2`                   |
//! | `root_ridge`           | `sqrt(max(0, -x)) + (x - 1)^2`                    |

use std::fmt;

use nalgebra::DVector;
use thiserror::Error;

use crate::minnorm::SubdifferentialModel;
use crate::types::{vector, Objective, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LipschitzClass {
    LocallyLipschitz,
    /// Directionally Lipschitz but not locally Lipschitz somewhere.
    DirectionallyLipschitzOnly,
}

/// A point where the subdifferential is known in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownPoint {
    pub point: Vector,
    pub model: SubdifferentialModel,
    pub note: String,
}

/// An objective bundled with its ground truth.
pub struct TestFunction {
    pub name: String,
    pub lipschitz_class: LipschitzClass,
    pub known_points: Vec<KnownPoint>,
    pub known_minimizers: Vec<Vector>,
    objective: Box<dyn Objective>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("dim", &self.objective.dim())
            .field("lipschitz_class", &self.lipschitz_class)
            .finish_non_exhaustive()
    }
}

impl TestFunction {
    /// The stored model at `x`, if `x` is one of the known points.
    pub fn known_point(&self, x: &Vector) -> Option<&KnownPoint> {
        self.known_points.iter().find(|kp| &kp.point == x)
    }

    /// Euclidean distance from `x` to the nearest known minimizer.
    pub fn dist_to_known_min(&self, x: &Vector) -> Option<f64> {
        self.known_minimizers
            .iter()
            .map(|m| (m - x).norm())
            .min_by(f64::total_cmp)
    }
}

impl Objective for TestFunction {
    fn dim(&self) -> usize {
        self.objective.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.objective.eval(x)
    }
    fn grad(&self, x: &Vector) -> Vector {
        self.objective.grad(x)
    }
    fn in_smooth_set(&self, x: &Vector) -> bool {
        self.objective.in_smooth_set(x)
    }
}

fn model(dim: usize, v: Vec<Vector>, w: Vec<Vector>) -> SubdifferentialModel {
    SubdifferentialModel::new(dim, v, w).expect("testbed models are well formed")
}

// ---------------------------------------------------------------------------

struct AbsSum {
    n: usize,
}

impl Objective for AbsSum {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &Vector) -> f64 {
        x.iter().map(|c| c.abs()).sum()
    }
    fn grad(&self, x: &Vector) -> Vector {
        x.map(f64::signum)
    }
    fn in_smooth_set(&self, x: &Vector) -> bool {
        x.iter().all(|&c| c != 0.0)
    }
}

/// `||x||_1` in `R^n`.
pub fn make_abs_sum(n: usize) -> TestFunction {
    let mut known_points = Vec::new();
    // 2^n sign patterns; only stored while that stays small
    if n <= 10 {
        let vertices = (0..1usize << n)
            .map(|mask| DVector::from_fn(n, |i, _| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }))
            .collect();
        known_points.push(KnownPoint {
            point: DVector::zeros(n),
            model: model(n, vertices, vec![]),
            note: "all sign patterns".into(),
        });
    }
    TestFunction {
        name: format!("abs_sum:{n}"),
        lipschitz_class: LipschitzClass::LocallyLipschitz,
        known_points,
        known_minimizers: vec![DVector::zeros(n)],
        objective: Box::new(AbsSum { n }),
    }
}

// ---------------------------------------------------------------------------

struct CubeRoot {
    eta: f64,
}

impl Objective for CubeRoot {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &Vector) -> f64 {
        let x = x[0];
        if x <= 0.0 {
            x.cbrt() - self.eta
        } else {
            x.cbrt() + self.eta
        }
    }
    fn grad(&self, x: &Vector) -> Vector {
        let c = x[0].cbrt();
        vector(&[1.0 / (3.0 * c * c)])
    }
    fn in_smooth_set(&self, x: &Vector) -> bool {
        x[0] != 0.0
    }
}

/// `x^(1/3) - eta` for `x <= 0`, `x^(1/3) + eta` for `x > 0`.
///
/// At 0 the gradients blow up to `+inf` from both sides: no finite
/// generalized gradient exists and the horizon direction is `+1`.
pub fn make_cube_root(eta: f64) -> TestFunction {
    TestFunction {
        name: format!("cube_root:eta={eta}"),
        lipschitz_class: LipschitzClass::DirectionallyLipschitzOnly,
        known_points: vec![KnownPoint {
            point: vector(&[0.0]),
            model: model(1, vec![], vec![vector(&[1.0])]),
            note: "gradient blow-up, empty subdifferential".into(),
        }],
        known_minimizers: vec![],
        objective: Box::new(CubeRoot { eta }),
    }
}

// ---------------------------------------------------------------------------

struct TiltedRootDistance {
    beta: f64,
}

impl TiltedRootDistance {
    fn excess(x: &Vector) -> Vector {
        x.map(|c| c.min(0.0))
    }
}

impl Objective for TiltedRootDistance {
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, x: &Vector) -> f64 {
        -x[0] + self.beta * x[1] + Self::excess(x).norm().sqrt()
    }
    fn grad(&self, x: &Vector) -> Vector {
        let tilt = vector(&[-1.0, self.beta]);
        // x - P(x) is the negative part of x
        let r = Self::excess(x);
        let d = r.norm();
        if d == 0.0 {
            tilt
        } else {
            tilt + r / (2.0 * d * d.sqrt())
        }
    }
    fn in_smooth_set(&self, x: &Vector) -> bool {
        let in_orthant = x[0] >= 0.0 && x[1] >= 0.0;
        !(in_orthant && (x[0] == 0.0 || x[1] == 0.0))
    }
}

/// `<(-1, beta), x> + dist(x, R^2_+)^(1/2)`; at 0 the subdifferential is
/// `(-1, beta) + R^2_-`.
pub fn make_tilted_root_distance(beta: f64) -> TestFunction {
    TestFunction {
        name: format!("tilted_root:beta={beta}"),
        lipschitz_class: LipschitzClass::DirectionallyLipschitzOnly,
        known_points: vec![KnownPoint {
            point: vector(&[0.0, 0.0]),
            model: model(
                2,
                vec![vector(&[-1.0, beta])],
                vec![vector(&[-1.0, 0.0]), vector(&[0.0, -1.0])],
            ),
            note: "tilt plus the nonpositive orthant".into(),
        }],
        known_minimizers: vec![],
        objective: Box::new(TiltedRootDistance { beta }),
    }
}

// ---------------------------------------------------------------------------

/// `0.5 * curvature * ||x - center||^2 + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPiece {
    pub center: Vector,
    pub curvature: f64,
    pub offset: f64,
}

impl QuadraticPiece {
    fn value(&self, x: &Vector) -> f64 {
        0.5 * self.curvature * (x - &self.center).norm_squared() + self.offset
    }
}

struct MaxQuadratics {
    pieces: Vec<QuadraticPiece>,
}

impl MaxQuadratics {
    /// Index of the unique active piece, if the max is attained once.
    fn active(&self, x: &Vector) -> Option<usize> {
        let mut best = f64::NEG_INFINITY;
        let mut idx = None;
        for (i, p) in self.pieces.iter().enumerate() {
            let v = p.value(x);
            if v > best {
                best = v;
                idx = Some(i);
            } else if v == best {
                idx = None;
            }
        }
        idx
    }
}

impl Objective for MaxQuadratics {
    fn dim(&self) -> usize {
        self.pieces[0].center.len()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }
    fn grad(&self, x: &Vector) -> Vector {
        let p = self
            .active(x)
            .map(|i| &self.pieces[i])
            .expect("grad called off the smooth set");
        (x - &p.center) * p.curvature
    }
    fn in_smooth_set(&self, x: &Vector) -> bool {
        self.active(x).is_some()
    }
}

/// Pointwise maximum of convex quadratics. Panics on an empty or
/// dimension-inconsistent piece list.
pub fn make_max_quadratics(pieces: Vec<QuadraticPiece>) -> TestFunction {
    assert!(!pieces.is_empty(), "max_quad needs at least one piece");
    let n = pieces[0].center.len();
    assert!(pieces.iter().all(|p| p.center.len() == n));
    TestFunction {
        name: format!("max_quad[{}]", pieces.len()),
        lipschitz_class: LipschitzClass::LocallyLipschitz,
        known_points: vec![],
        known_minimizers: vec![],
        objective: Box::new(MaxQuadratics { pieces }),
    }
}

/// `max_{c in {+-e_j}} 0.5 ||x - c||^2 = 0.5 ||x||^2 + max_j |x_j| + 0.5`,
/// minimized at 0.
pub fn make_axis_max_quadratics(n: usize) -> TestFunction {
    let centers: Vec<Vector> = (0..n)
        .flat_map(|j| {
            [1.0, -1.0].map(|s| DVector::from_fn(n, |i, _| if i == j { s } else { 0.0 }))
        })
        .collect();
    let pieces = centers
        .iter()
        .map(|c| QuadraticPiece {
            center: c.clone(),
            curvature: 1.0,
            offset: 0.0,
        })
        .collect();
    let mut tf = make_max_quadratics(pieces);
    tf.name = format!("max_quad:{n}");
    tf.known_points.push(KnownPoint {
        point: DVector::zeros(n),
        model: model(n, centers.iter().map(|c| -c).collect(), vec![]),
        note: "all pieces active".into(),
    });
    tf.known_minimizers.push(DVector::zeros(n));
    tf
}

// ---------------------------------------------------------------------------

struct NonsmoothRosenbrock;

impl Objective for NonsmoothRosenbrock {
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, x: &Vector) -> f64 {
        8.0 * (x[0] * x[0] - x[1]).abs() + (1.0 - x[0]).powi(2)
    }
    fn grad(&self, x: &Vector) -> Vector {
        let s = (x[0] * x[0] - x[1]).signum();
        vector(&[16.0 * s * x[0] - 2.0 * (1.0 - x[0]), -8.0 * s])
    }
    fn in_smooth_set(&self, x: &Vector) -> bool {
        x[0] * x[0] != x[1]
    }
}

/// `8 |x_1^2 - x_2| + (1 - x_1)^2`, nonsmooth along the parabola.
pub fn make_nonsmooth_rosenbrock() -> TestFunction {
    TestFunction {
        name: "rosenbrock_ns".into(),
        lipschitz_class: LipschitzClass::LocallyLipschitz,
        known_points: vec![KnownPoint {
            point: vector(&[1.0, 1.0]),
            model: model(
                2,
                vec![vector(&[16.0, -8.0]), vector(&[-16.0, 8.0])],
                vec![],
            ),
            note: "minimizer on the parabola".into(),
        }],
        known_minimizers: vec![vector(&[1.0, 1.0])],
        objective: Box::new(NonsmoothRosenbrock),
    }
}

// ---------------------------------------------------------------------------

struct RootRidge;

impl Objective for RootRidge {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &Vector) -> f64 {
        let x = x[0];
        (-x).max(0.0).sqrt() + (x - 1.0).powi(2)
    }
    fn grad(&self, x: &Vector) -> Vector {
        let x = x[0];
        let root = if x < 0.0 { -0.5 / (-x).sqrt() } else { 0.0 };
        vector(&[root + 2.0 * (x - 1.0)])
    }
    fn in_smooth_set(&self, x: &Vector) -> bool {
        x[0] != 0.0
    }
}

/// `sqrt(max(0, -x)) + (x - 1)^2`: not Lipschitz at 0, minimized at 1.
///
/// At 0 the right derivative is `-2` and the left one runs off to `-inf`, so
/// the subdifferential is `(-inf, -2]`.
pub fn make_root_ridge() -> TestFunction {
    TestFunction {
        name: "root_ridge".into(),
        lipschitz_class: LipschitzClass::DirectionallyLipschitzOnly,
        known_points: vec![KnownPoint {
            point: vector(&[0.0]),
            model: model(1, vec![vector(&[-2.0])], vec![vector(&[-1.0])]),
            note: "non-Lipschitz kink".into(),
        }],
        known_minimizers: vec![vector(&[1.0])],
        objective: Box::new(RootRidge),
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("unknown function `{0}` (known: abs_sum:N, cube_root:eta=E, tilted_root:beta=B, max_quad:N, rosenbrock_ns, root_ridge)")]
    UnknownFunction(String),
    #[error("bad argument `{arg}` for `{name}`: {reason}")]
    BadArgument {
        name: String,
        arg: String,
        reason: &'static str,
    },
}

/// Builds a test function from its registry name, e.g. `abs_sum:2` or
/// `tilted_root:beta=0.5`.
pub fn lookup(entry: &str) -> Result<TestFunction, RegistryError> {
    let entry = entry.trim();
    let (name, arg) = match entry.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (entry, None),
    };
    let bad = |reason| RegistryError::BadArgument {
        name: name.to_string(),
        arg: arg.unwrap_or("").to_string(),
        reason,
    };
    let dim = |arg: Option<&str>| -> Result<usize, RegistryError> {
        let a = arg.ok_or_else(|| bad("missing dimension"))?;
        let a = a.strip_prefix("n=").unwrap_or(a);
        match a.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(bad("dimension must be a positive integer")),
        }
    };
    let real = |arg: Option<&str>, key: &str, default: Option<f64>| -> Result<f64, RegistryError> {
        match arg {
            None => default.ok_or_else(|| bad("missing parameter")),
            Some(a) => {
                let v = a.strip_prefix(key).and_then(|r| r.strip_prefix('=')).unwrap_or(a);
                match v.parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(x),
                    _ => Err(bad("expected a finite real")),
                }
            }
        }
    };
    let no_arg = |arg: Option<&str>| match arg {
        None => Ok(()),
        Some(_) => Err(bad("takes no arguments")),
    };

    match name {
        "abs_sum" => Ok(make_abs_sum(dim(arg)?)),
        "cube_root" => {
            let eta = real(arg, "eta", Some(0.0))?;
            if eta < 0.0 {
                return Err(bad("eta must be >= 0"));
            }
            Ok(make_cube_root(eta))
        }
        "tilted_root" => Ok(make_tilted_root_distance(real(arg, "beta", None)?)),
        "max_quad" => Ok(make_axis_max_quadratics(dim(arg)?)),
        "rosenbrock_ns" | "nonsmooth_rosenbrock" => {
            no_arg(arg)?;
            Ok(make_nonsmooth_rosenbrock())
        }
        "root_ridge" => {
            no_arg(arg)?;
            Ok(make_root_ridge())
        }
        _ => Err(RegistryError::UnknownFunction(entry.to_string())),
    }
}
