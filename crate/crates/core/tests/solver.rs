use gradsamp::testbed;
use gradsamp::*;

struct HalfSquare(usize);

impl Objective for HalfSquare {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, x: &Vector) -> f64 {
        0.5 * x.norm_squared()
    }
    fn grad(&self, x: &Vector) -> Vector {
        x.clone()
    }
    fn in_smooth_set(&self, _: &Vector) -> bool {
        true
    }
}

struct Linear;

impl Objective for Linear {
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

/// `|x|`, but only differentiable for `x > 0.05` or `x < -0.05`.
struct FatKinkAbs;

impl Objective for FatKinkAbs {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &Vector) -> f64 {
        x[0].abs()
    }
    fn grad(&self, x: &Vector) -> Vector {
        vector(&[x[0].signum()])
    }
    fn in_smooth_set(&self, x: &Vector) -> bool {
        x[0].abs() > 0.05
    }
}

struct Blowup;

impl Objective for Blowup {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &Vector) -> f64 {
        if x[0] < 0.5 {
            f64::NAN
        } else {
            x[0]
        }
    }
    fn grad(&self, _: &Vector) -> Vector {
        vector(&[1.0])
    }
    fn in_smooth_set(&self, _: &Vector) -> bool {
        true
    }
}

fn state(x: &[f64], f: &impl Objective, eps: f64, nu: f64) -> SolverState {
    let x = vector(x);
    SolverState {
        k: 0,
        f_val: f.eval(&x),
        x,
        eps,
        nu,
    }
}

#[test]
fn iteration_stops_on_zero_gradient() {
    let f = HalfSquare(2);
    let p = GsParams::for_dim(2);
    let out = gs_iteration(&f, &state(&[0.0, 0.0], &f, 0.1, 0.1), &p, &mut RngStream::new(0, 0)).unwrap();
    match out {
        IterationOutcome::Stop(TerminationStatus::GradientZero, Some(rec)) => {
            assert_eq!(rec.step_kind, StepKind::Terminal);
            assert_eq!(rec.g_norm, 0.0);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn iteration_reduces_radius_and_target() {
    let f = HalfSquare(2);
    let p = GsParams {
        nu_opt: 1e-6,
        theta_eps: 0.5,
        theta_nu: 0.25,
        ..GsParams::for_dim(2)
    };
    let s = state(&[0.01, 0.0], &f, 0.1, 0.5);
    let IterationOutcome::Continue(next, rec) =
        gs_iteration(&f, &s, &p, &mut RngStream::new(1, 0)).unwrap()
    else {
        panic!("expected a reduction");
    };
    assert!(rec.g_norm <= 0.5);
    assert_eq!(rec.step_kind, StepKind::Reduction);
    assert_eq!(rec.t_k, 0.0);
    assert_eq!(next.x, s.x);
    assert_eq!(next.eps, 0.05);
    assert_eq!(next.nu, 0.125);
}

#[test]
fn iteration_on_abs_away_from_kink() {
    let f = testbed::make_abs_sum(1);
    let p = GsParams {
        beta: 0.5,
        gamma: 0.5,
        ..GsParams::for_dim(1)
    };
    let s = state(&[0.3], &f, 0.1, 0.1);
    let IterationOutcome::Continue(next, rec) =
        gs_iteration(&f, &s, &p, &mut RngStream::new(0, 0)).unwrap()
    else {
        panic!("expected a step");
    };
    assert_eq!(rec.g, vector(&[1.0]));
    assert_eq!(rec.t_k, 0.25);
    assert_eq!(rec.step_kind, StepKind::LineSearch);
    assert!(!rec.perturbed);
    assert!((next.x[0] - 0.05).abs() < 1e-15);
}

#[test]
fn solve_from_minimizer_of_smooth_quadratic() {
    let f = HalfSquare(2);
    let t = gs_solve(&f, &vector(&[0.0, 0.0]), &GsParams::for_dim(2)).unwrap();
    assert_eq!(t.status, TerminationStatus::GradientZero);
    assert_eq!(t.records.len(), 1);
    assert_eq!(t.records[0].k, 0);
}

#[test]
fn solve_abs_sum() {
    let f = testbed::make_abs_sum(2);
    let p = GsParams {
        eps_opt: 1e-4,
        nu_opt: 1e-4,
        ..GsParams::for_dim(2)
    };
    let t = gs_solve(&f, &vector(&[5.0, 7.0]), &p).unwrap();
    assert_eq!(t.status, TerminationStatus::ToleranceMet);
    assert!(t.final_x.norm() <= 1e-2);
    let last = t.records.last().unwrap();
    assert!(last.g_norm <= p.nu_opt && last.eps_k <= p.eps_opt);
}

#[test]
fn solve_linear_diverges() {
    let p = GsParams {
        divergence_floor: -1e6,
        max_iter: 1_100_000,
        ..GsParams::for_dim(1)
    };
    let t = gs_solve(&Linear, &vector(&[0.0]), &p).unwrap();
    assert_eq!(t.status, TerminationStatus::ObjectiveDiverging);
    assert!(t.final_f < -1e6);
}

#[test]
fn solve_rejects_bad_input() {
    let f = testbed::make_abs_sum(2);
    let p = GsParams::for_dim(2);
    assert!(matches!(
        gs_solve(&f, &vector(&[1.0, 2.0, 3.0]), &p),
        Err(GsError::DimensionMismatch { .. })
    ));
    assert!(matches!(
        gs_solve(&f, &vector(&[0.0, 2.0]), &p),
        Err(GsError::StartNotSmooth { .. })
    ));
    let bad = GsParams { m: 2, ..p };
    assert!(matches!(
        gs_solve(&f, &vector(&[1.0, 2.0]), &bad),
        Err(GsError::ParameterOutOfRange { name: "m", .. })
    ));
}

#[test]
fn non_finite_objective_is_an_error() {
    let p = GsParams::for_dim(1);
    assert!(matches!(
        gs_solve(&Blowup, &vector(&[1.0]), &p),
        Err(GsError::NonFiniteObjective { .. })
    ));
}

#[test]
fn strict_and_resample_domain_policies() {
    let strict = GsParams {
        eps0: 0.5,
        ..GsParams::for_dim(1)
    };
    let t = gs_solve(&FatKinkAbs, &vector(&[0.2]), &strict).unwrap();
    assert_eq!(t.status, TerminationStatus::SampleOutsideDomain);

    let resample = GsParams {
        resample_outside_domain: true,
        max_iter: 50,
        ..strict
    };
    let t = gs_solve(&FatKinkAbs, &vector(&[0.2]), &resample).unwrap();
    assert_ne!(t.status, TerminationStatus::SampleOutsideDomain);
}

fn fixed_params(eps0: f64, m: usize, seed: u64) -> GsParams {
    GsParams {
        eps0,
        eps_opt: eps0,
        nu0: 0.0,
        nu_opt: 0.0,
        theta_eps: 1.0,
        theta_nu: 0.0,
        m,
        seed,
        ..GsParams::for_dim(1)
    }
}

#[test]
fn fixed_radius_abs_stops_with_zero_min_norm() {
    let f = testbed::make_abs_sum(1);
    let t = gs_solve_fixed_radius(&f, &vector(&[0.05]), &fixed_params(0.2, 2, 0)).unwrap();
    assert!(matches!(
        t.status,
        TerminationStatus::ToleranceMet | TerminationStatus::GradientZero
    ));
    assert_eq!(t.records.last().unwrap().g_norm, 0.0);
}

#[test]
fn fixed_radius_quadratic_does_not_stop_early() {
    let f = HalfSquare(1);
    for seed in 0..5 {
        let p = GsParams {
            max_iter: 200,
            ..fixed_params(0.1, 2, seed)
        };
        let t = gs_solve_fixed_radius(&f, &vector(&[1.0]), &p).unwrap();
        if matches!(
            t.status,
            TerminationStatus::ToleranceMet | TerminationStatus::GradientZero
        ) {
            // only possible once the ball straddles the minimizer
            assert!(t.final_x[0].abs() <= 0.1, "stopped at {}", t.final_x[0]);
        }
        for r in &t.records[..t.records.len().saturating_sub(1)] {
            assert!(r.g_norm > 0.0);
        }
    }
}

#[test]
fn fixed_radius_requires_unit_theta_eps() {
    let f = testbed::make_abs_sum(1);
    let p = GsParams {
        theta_eps: 0.5,
        ..fixed_params(0.2, 2, 0)
    };
    assert!(matches!(
        gs_solve_fixed_radius(&f, &vector(&[0.05]), &p),
        Err(GsError::ParameterOutOfRange { name: "theta_eps", .. })
    ));
}

#[test]
fn stepsize_floor_on_quadratic() {
    let f = HalfSquare(2);
    let p = GsParams {
        beta: 1e-4,
        gamma: 0.5,
        nu_opt: 0.0,
        ..GsParams::for_dim(2)
    };
    let floor = f64::min(1.0, 0.5 * 0.3 / 3.0);
    for seed in 0..100 {
        let s = state(&[1.0, 0.0], &f, 0.3, 1e-3);
        let IterationOutcome::Continue(_, rec) =
            gs_iteration(&f, &s, &p, &mut RngStream::new(seed, 0)).unwrap()
        else {
            panic!("expected a step");
        };
        assert_eq!(rec.step_kind, StepKind::LineSearch);
        assert!(rec.t_k >= floor, "t = {}", rec.t_k);
    }
}

/// Checks every per-trace invariant; returns a description of the first
/// violation.
fn trace_violation(t: &RunTrace, p: &GsParams, f0: f64) -> Option<String> {
    let mut prev_f = f0;
    let mut prev: Option<&IterationRecord> = None;
    for (i, r) in t.records.iter().enumerate() {
        if r.f_val > prev_f {
            return Some(format!("f increased at {i}"));
        }
        if let Some(q) = prev {
            if q.step_kind == StepKind::LineSearch && !(r.f_val < q.f_val) {
                return Some(format!("no strict decrease after step {}", i - 1));
            }
            let reduced = q.step_kind == StepKind::Reduction;
            let eps_ok = if reduced { r.eps_k == p.theta_eps * q.eps_k } else { r.eps_k == q.eps_k };
            let nu_ok = if reduced { r.nu_k == p.theta_nu * q.nu_k } else { r.nu_k == q.nu_k };
            if !(eps_ok && nu_ok) {
                return Some(format!("radius/target coupling broken at {i}"));
            }
        }
        let reduction_shape = r.t_k == 0.0 && r.g_norm <= r.nu_k;
        if (r.step_kind == StepKind::Reduction) != (reduction_shape && r.step_kind != StepKind::Terminal) {
            return Some(format!("step kind inconsistent at {i}"));
        }
        if r.perturbed {
            let d = -&r.g / r.g_norm;
            let cand = &r.x + d * r.t_k;
            if (cand - t.next_x(i)).norm() > r.t_k.min(r.eps_k) {
                return Some(format!("perturbation bound broken at {i}"));
            }
        }
        prev_f = r.f_val;
        prev = Some(r);
    }
    if t.final_f > prev_f {
        return Some("final f above last record".into());
    }
    if p.beta * t.step_sum() > f0 - t.final_f + 1e-9 {
        return Some("summability bound broken".into());
    }
    if t.status == TerminationStatus::ToleranceMet {
        let last = t.records.last()?;
        if !(last.g_norm <= p.nu_opt && last.eps_k <= p.eps_opt) {
            return Some("ToleranceMet without tolerances".into());
        }
    }
    None
}

#[test]
fn trace_invariants_across_testbed() {
    let cases: &[(&str, &[f64])] = &[
        ("abs_sum:2", &[5.0, 7.0]),
        ("abs_sum:3", &[1.0, -2.0, 0.5]),
        ("max_quad:2", &[1.5, -0.75]),
        ("rosenbrock_ns", &[-1.0, 1.5]),
        ("root_ridge", &[-0.5]),
        ("cube_root:eta=0", &[-1.0]),
        ("tilted_root:beta=0.5", &[-0.5, 0.5]),
        ("tilted_root:beta=-0.5", &[-0.5, 0.5]),
    ];
    for (name, x0) in cases {
        let f = testbed::lookup(name).unwrap();
        for seed in 0..4 {
            let p = GsParams {
                eps_opt: 1e-4,
                nu_opt: 1e-4,
                max_iter: 2000,
                seed,
                ..GsParams::for_dim(f.dim())
            };
            let x0 = vector(x0);
            let t = gs_solve(&f, &x0, &p).unwrap();
            if let Some(v) = trace_violation(&t, &p, f.eval(&x0)) {
                panic!("{name} seed {seed}: {v}");
            }
            let again = gs_solve(&f, &x0, &p).unwrap();
            assert!(t.same_path(&again), "{name} seed {seed} not deterministic");
        }
    }
}

#[test]
fn nudged_start_is_smooth_and_close() {
    let f = testbed::make_nonsmooth_rosenbrock();
    let x0 = vector(&[-1.0, 1.0]);
    assert!(!f.in_smooth_set(&x0));
    let y = nudge_into_smooth_set(&f, &x0, 1e-8, 3, 100).unwrap();
    assert!(f.in_smooth_set(&y));
    assert!((y - &x0).norm() <= 1e-8);
    let same = vector(&[2.0, 1.0]);
    assert_eq!(nudge_into_smooth_set(&f, &same, 1e-8, 3, 100), Some(same));
}
