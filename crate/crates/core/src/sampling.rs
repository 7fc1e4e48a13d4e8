//! Reproducible uniform sampling from Euclidean balls and assembly of the
//! sampled gradient hull.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{GsError, Result};
use crate::types::{grad_checked, Objective, Vector};

/// A deterministic random stream identified by `(seed, stream_id)`.
///
/// The solver uses the iteration index as the stream id, so extra draws made
/// by diagnostics never shift the samples of a later iteration.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub(crate) fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// Draws `count` points uniformly from the closed ball of `radius` around
/// `center`.
///
/// Direction is a normalized standard Gaussian vector, distance from the
/// center is `radius * U^(1/n)`.
pub fn sample_uniform_ball(
    center: &Vector,
    radius: f64,
    count: usize,
    rng: &mut RngStream,
) -> Vec<Vector> {
    (0..count)
        .map(|_| sample_one(center, radius, rng))
        .collect()
}

pub(crate) fn sample_one(center: &Vector, radius: f64, rng: &mut RngStream) -> Vector {
    let n = center.len();
    let z = loop {
        let z = DVector::from_fn(n, |_, _| rng.gaussian());
        let norm = z.norm();
        if norm > 0.0 && norm.is_finite() {
            break z / norm;
        }
    };
    let u = rng.uniform();
    let mut offset = z * (radius * u.powf(1.0 / n as f64));
    // rounding in the scale or in `center + offset` may leave the point a few
    // ulps outside the sphere
    loop {
        let y = center + &offset;
        if (&y - center).norm() <= radius {
            return y;
        }
        offset *= 1.0 - 4.0 * f64::EPSILON;
    }
}

/// How sample points that land outside the smooth set are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainPolicy {
    /// Report the first offending point.
    Strict,
    /// Re-draw each offending point up to `max_attempts` times.
    Resample { max_attempts: usize },
}

/// Sampled points around a center and the gradients at them.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientCloud {
    pub center: Vector,
    pub radius: f64,
    pub sample_points: Vec<Vector>,
    /// Gradient at the center first, then one per sample point.
    pub gradients: Vec<Vector>,
}

/// Samples `m` points in the `eps`-ball around `x` and evaluates gradients
/// there and at `x`.
///
/// Fails with [`GsError::SampleOutsideDomain`] if a point misses the smooth
/// set (after re-draws, under [`DomainPolicy::Resample`]).
pub fn build_cloud<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    eps: f64,
    m: usize,
    rng: &mut RngStream,
    policy: DomainPolicy,
) -> Result<GradientCloud> {
    if !f.in_smooth_set(x) {
        return Err(GsError::StartNotSmooth {
            point: x.as_slice().to_vec(),
        });
    }
    let mut points = sample_uniform_ball(x, eps, m, rng);
    for p in points.iter_mut() {
        if f.in_smooth_set(p) {
            continue;
        }
        let attempts = match policy {
            DomainPolicy::Strict => 0,
            DomainPolicy::Resample { max_attempts } => max_attempts,
        };
        let mut fixed = false;
        for _ in 0..attempts {
            let q = sample_one(x, eps, rng);
            if f.in_smooth_set(&q) {
                *p = q;
                fixed = true;
                break;
            }
        }
        if !fixed {
            return Err(GsError::SampleOutsideDomain {
                point: p.as_slice().to_vec(),
            });
        }
    }

    let mut gradients = Vec::with_capacity(m + 1);
    gradients.push(grad_checked(f, x)?);
    for p in &points {
        gradients.push(grad_checked(f, p)?);
    }
    Ok(GradientCloud {
        center: x.clone(),
        radius: eps,
        sample_points: points,
        gradients,
    })
}

/// Stream id reserved for [`nudge_into_smooth_set`]; iteration streams count
/// up from 0 and never reach it.
pub const NUDGE_STREAM: u64 = u64::MAX;

/// Returns `x` if it is in the smooth set, otherwise the first of up to
/// `max_attempts` uniform draws from the `radius`-ball around `x` that is.
pub fn nudge_into_smooth_set<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    radius: f64,
    seed: u64,
    max_attempts: usize,
) -> Option<Vector> {
    if f.in_smooth_set(x) {
        return Some(x.clone());
    }
    let mut rng = RngStream::new(seed, NUDGE_STREAM);
    (0..max_attempts)
        .map(|_| sample_one(x, radius, &mut rng))
        .find(|y| f.in_smooth_set(y))
}

/// Draws `count` points of the `eps`-ball that lie in the smooth set,
/// re-drawing misses (at most `count * 1000` draws in total).
pub(crate) fn sample_smooth_points<F: Objective + ?Sized>(
    f: &F,
    x: &Vector,
    eps: f64,
    count: usize,
    rng: &mut RngStream,
) -> Result<Vec<Vector>> {
    let budget = count.saturating_mul(1000).max(1000);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        if draws == budget {
            return Err(GsError::SampleOutsideDomain {
                point: x.as_slice().to_vec(),
            });
        }
        draws += 1;
        let y = sample_one(x, eps, rng);
        if f.in_smooth_set(&y) {
            out.push(y);
        }
    }
    Ok(out)
}
