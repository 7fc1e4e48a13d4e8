use gradsamp::testbed::{self, TestFunction};
use gradsamp::{vector, Objective, Vector};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_functions() -> Vec<TestFunction> {
    [
        "abs_sum:1",
        "abs_sum:3",
        "cube_root:eta=0",
        "cube_root:eta=1",
        "tilted_root:beta=0.5",
        "tilted_root:beta=-1",
        "max_quad:2",
        "rosenbrock_ns",
        "root_ridge",
    ]
    .iter()
    .map(|n| testbed::lookup(n).unwrap())
    .collect()
}

/// Distance from `x` to the nondifferentiability set of `f`, for choosing
/// finite-difference points that stay on one smooth piece.
fn clearance(f: &TestFunction, x: &Vector) -> f64 {
    let name = f.name.split(':').next().unwrap();
    match name {
        "abs_sum" | "cube_root" | "root_ridge" => x.iter().map(|c| c.abs()).fold(f64::INFINITY, f64::min),
        "tilted_root" => {
            // boundary of the orthant, plus keep away from the dist^(1/2) blow-up
            let outside = x.map(|c| c.min(0.0)).norm();
            if outside > 0.0 {
                outside
            } else {
                x[0].min(x[1])
            }
        }
        "max_quad" => {
            // tie between the two largest |x_j|, or a zero largest coordinate
            let mut a: Vec<f64> = x.iter().map(|c| c.abs()).collect();
            a.sort_by(|p, q| q.total_cmp(p));
            let gap = if a.len() > 1 { a[0] - a[1] } else { a[0] };
            gap.min(a[0])
        }
        "rosenbrock_ns" => (x[0] * x[0] - x[1]).abs() / (1.0 + 2.0 * x[0].abs()),
        other => panic!("no clearance rule for {other}"),
    }
}

#[test]
fn gradients_match_central_differences() {
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for f in all_functions() {
        let n = f.dim();
        let mut checked = 0;
        while checked < 100 {
            let x = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
            if !f.in_smooth_set(&x) || clearance(&f, &x) < 0.1 {
                continue;
            }
            let g = f.grad(&x);
            for i in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (f.eval(&xp) - f.eval(&xm)) / (2.0 * h);
                let err = (fd - g[i]).abs();
                assert!(
                    err <= 1e-5 * g[i].abs().max(1.0),
                    "{}: d/dx{i} at {x:?}: fd {fd} vs {}",
                    f.name,
                    g[i]
                );
            }
            checked += 1;
        }
    }
}

fn assert_boundary(f: &TestFunction, points: &[Vec<f64>]) {
    assert!(points.len() >= 20, "{} needs 20 boundary points", f.name);
    for p in points {
        assert!(!f.in_smooth_set(&vector(p)), "{} should be nonsmooth at {p:?}", f.name);
    }
}

fn assert_smooth(f: &TestFunction, points: &[Vec<f64>]) {
    for p in points {
        assert!(f.in_smooth_set(&vector(p)), "{} should be smooth at {p:?}", f.name);
    }
}

#[test]
fn smooth_set_is_exact() {
    let grid: Vec<f64> = (-10..10).map(|i| i as f64 * 0.25 + 0.125).collect();

    let abs1 = testbed::lookup("abs_sum:1").unwrap();
    assert_boundary(&abs1, &vec![vec![0.0]; 20]);
    assert_smooth(&abs1, &grid.iter().map(|&t| vec![t]).collect::<Vec<_>>());

    let abs2 = testbed::lookup("abs_sum:2").unwrap();
    let on_axes: Vec<Vec<f64>> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| if i % 2 == 0 { vec![0.0, t] } else { vec![t, 0.0] })
        .collect();
    assert_boundary(&abs2, &on_axes);
    assert_smooth(&abs2, &grid.iter().map(|&t| vec![t, -t]).collect::<Vec<_>>());

    for name in ["cube_root:eta=0", "cube_root:eta=1", "root_ridge"] {
        let f = testbed::lookup(name).unwrap();
        assert_boundary(&f, &vec![vec![0.0]; 20]);
        assert_smooth(&f, &grid.iter().map(|&t| vec![t]).collect::<Vec<_>>());
    }

    let tilted = testbed::lookup("tilted_root:beta=0.5").unwrap();
    let edges: Vec<Vec<f64>> = (0..20)
        .map(|i| {
            let t = i as f64 * 0.5;
            if i % 2 == 0 {
                vec![t, 0.0]
            } else {
                vec![0.0, t]
            }
        })
        .collect();
    assert_boundary(&tilted, &edges);
    // the negative half-axes are outside the orthant, where dist is smooth
    assert_smooth(
        &tilted,
        &[vec![-1.0, 0.0], vec![0.0, -1.0], vec![-1.0, -1.0], vec![1.0, 1.0], vec![-2.0, 3.0]],
    );

    let rosen = testbed::lookup("rosenbrock_ns").unwrap();
    let parabola: Vec<Vec<f64>> = grid.iter().map(|&t| vec![t, t * t]).collect();
    assert_boundary(&rosen, &parabola);
    assert_smooth(&rosen, &grid.iter().map(|&t| vec![t, t * t + 0.5]).collect::<Vec<_>>());

    let mq = testbed::lookup("max_quad:2").unwrap();
    let ties: Vec<Vec<f64>> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| match i % 3 {
            0 => vec![t, t],
            1 => vec![t, -t],
            _ => vec![0.0, 0.0],
        })
        .collect();
    assert_boundary(&mq, &ties);
    assert_smooth(&mq, &[vec![1.0, 0.5], vec![-0.25, 0.125], vec![0.5, 0.0]]);
}

#[test]
fn known_points_have_consistent_dimensions() {
    for f in all_functions() {
        for kp in &f.known_points {
            assert_eq!(kp.point.len(), f.dim());
            assert_eq!(kp.model.dim(), f.dim());
            assert!(kp.model.vertices().iter().all(|v| v.len() == f.dim()));
            assert!(kp.model.cone_generators().iter().all(|w| w.len() == f.dim()));
        }
        for m in &f.known_minimizers {
            assert_eq!(m.len(), f.dim());
        }
    }
}

#[test]
fn tilted_root_gradient_off_orthant_by_differences() {
    let h = testbed::make_tilted_root_distance(0.3);
    let x = vector(&[-4.0, 1.0]);
    let g = h.grad(&x);
    let step = 1e-6;
    let fd0 = (h.eval(&vector(&[-4.0 + step, 1.0])) - h.eval(&vector(&[-4.0 - step, 1.0]))) / (2.0 * step);
    let fd1 = (h.eval(&vector(&[-4.0, 1.0 + step])) - h.eval(&vector(&[-4.0, 1.0 - step]))) / (2.0 * step);
    assert!((fd0 - g[0]).abs() < 1e-8 && (fd1 - g[1]).abs() < 1e-8);
    assert!((g[0] + 1.25).abs() < 1e-15);
}

#[test]
fn root_ridge_gradient_by_differences() {
    let f = testbed::make_root_ridge();
    let step = 1e-6;
    let fd = (f.eval(&vector(&[-0.25 + step])) - f.eval(&vector(&[-0.25 - step]))) / (2.0 * step);
    assert!((fd + 3.5).abs() < 1e-6);
}
