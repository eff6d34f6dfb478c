use super::*;
use crate::geometry::{BoxSet, SUBLEVEL_TOL};
use crate::geometry::project_sublevel;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn parabola_set() -> ProxSmoothSet {
    let pieces = vec![
        Quadratic::diagonal(&[2.0, 0.0], Vector::from([0.0, -1.0]), 0.0).unwrap(),
        Quadratic::diagonal(&[-0.4, 0.0], Vector::from([0.0, 1.0]), -0.8).unwrap(),
    ];
    ProxSmoothSet::Sublevel(
        SublevelSet::with_radius(pieces, 2.5)
            .unwrap()
            .with_bounds(Vector::from([-1.0, 0.0]), Vector::from([1.0, 1.0])),
    )
}

fn e(dim: usize, i: usize) -> Vector {
    Vector::basis(dim, i)
}

#[test]
fn identity_returns_the_set() {
    let set = ProxSmoothSet::Box(BoxSet::interval(-1.0, 1.0).unwrap());
    let a = SetApproximation::identity(set.clone());
    let local = a.build(&[0.3]).unwrap();
    assert_eq!(local.set, set);
    assert_eq!(local.retraction, Retraction::Identity);
    assert_eq!(a.retract(&[0.3], &[0.9]).unwrap(), Vector::from([0.9]));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert_eq!(a.check_condition_i(&[0.3], 200, &mut rng).unwrap(), 0.0);
    assert_eq!(a.check_condition_ii(&[0.3], 200, &mut rng).unwrap(), 0.0);
}

#[test]
fn infeasible_basepoint_is_rejected() {
    let a = SetApproximation::tangent_sphere(3, 0.5).unwrap();
    assert!(matches!(a.build(&[2.0, 0.0, 0.0]), Err(Error::InfeasibleBasepoint(_))));
}

#[test]
fn tangent_plane_at_e1() {
    let a = SetApproximation::tangent_sphere(3, 0.5).unwrap();
    let local = a.build(&e(3, 0)).unwrap();
    let ProxSmoothSet::Affine(plane) = &local.set else {
        panic!("expected an affine set");
    };
    assert_eq!(plane.basis().len(), 2);
    for u in plane.basis() {
        assert!(u[0].abs() < 1e-15);
        assert!((u.norm() - 1.0).abs() < 1e-15);
    }
    assert!(local.set.contains(&[1.0, 3.0, -2.0], 1e-12));
    assert!(!local.set.contains(&[1.1, 0.0, 0.0], 1e-9));
}

#[test]
fn radial_retraction_example() {
    let a = SetApproximation::tangent_sphere(3, 0.5).unwrap();
    let x = e(3, 0);
    let y = Vector::from([1.0, 1.0, 0.0]);
    let r = a.retract(&x, &y).unwrap();
    let s = 0.5f64.sqrt();
    assert!(r.dist(&[s, s, 0.0]) < 1e-15);
    let gap = r.dist(&y);
    assert!((gap - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    assert!(gap <= 0.5 * dist_sq(&x, &y));
    assert_eq!(a.retract(&x, &x).unwrap(), x);
    assert!(matches!(
        a.retract(&x, &[1.5, 0.0, 0.0]),
        Err(Error::OutsideApprox(_))
    ));
}

#[test]
fn tangent_condition_i_is_tight_at_e2() {
    let a = SetApproximation::tangent_sphere(3, 0.5).unwrap();
    let x = e(3, 0);
    let y = e(3, 1);
    let d = a.build(&x).unwrap().set.distance(&y).unwrap();
    assert!((d - 1.0).abs() < 1e-15);
    assert!((d - 0.5 * dist_sq(&x, &y)).abs() < 1e-15);
}

#[test]
fn tangent_conditions_hold_by_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for dim in [3, 10] {
        let a = SetApproximation::tangent_sphere(dim, 0.9).unwrap();
        for _ in 0..3 {
            let x = sphere_point(&mut rng, dim);
            assert!(a.check_condition_i(&x, 2000, &mut rng).unwrap() <= 1e-10);
            assert!(a.check_condition_ii(&x, 2000, &mut rng).unwrap() <= 1e-10);
        }
    }
}

#[test]
fn proximal_row_on_unit_ball_constraint() {
    // g(y) = ‖y‖² − 1 as ½yᵀ(2I)y − 1.
    let g = Quadratic::diagonal(&[2.0, 2.0], Vector::zeros(2), -1.0).unwrap();
    let set = ProxSmoothSet::Sublevel(SublevelSet::convex(vec![g]).unwrap());
    let a = SetApproximation::functional_inner(set, ConstraintModel::Exact, 2.0, 0.0, 1.0).unwrap();
    let x = [0.6, 0.8];
    let local = a.build(&x).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let y = ball_point_2d(&mut rng, 1.5);
        let expected = dot(&y, &y) - 1.0 + dist_sq(&y, &x);
        assert!((a.local_constraint(&x, &y) - expected).abs() < 1e-13);
        assert_eq!(local.set.contains(&y, 0.0), expected <= 0.0);
    }
    assert_eq!(a.retract(&x, &x).unwrap(), Vector::from(x));
}

fn ball_point_2d(rng: &mut ChaCha8Rng, r: f64) -> Vector {
    crate::rng::ball_point(rng, &[0.0, 0.0], r)
}

fn inner(model: ConstraintModel) -> SetApproximation {
    // Calibrated τ1: about twice the worst observed ratio on boundary sweeps.
    let (gamma, tau1) = match model {
        ConstraintModel::Exact => (0.5, 2.0),
        ConstraintModel::Linearized => (2.2, 8.0),
    };
    SetApproximation::functional_inner(parabola_set(), model, gamma, tau1, 0.5).unwrap()
}

#[test]
fn parabola_inner_sets_are_convex_and_inside() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for model in [ConstraintModel::Exact, ConstraintModel::Linearized] {
        let a = inner(model);
        for x in [[1.0, 1.0], [-0.7, 0.8]] {
            let local = a.build(&x).unwrap();
            assert!(local.set.is_convex());
            for y in a.sample_local_points(&x, 2000, 1.0, &mut rng).unwrap() {
                assert!(local.set.contains(&y, 1e-12));
                assert!(a.set().contains(&y, 1e-9), "{y:?} escapes X");
            }
        }
    }
}

/// Distance to `X_x` by a fine grid over the bounding box of `X`.
fn grid_distance(a: &SetApproximation, x: &[f64], y: &[f64], h: f64) -> f64 {
    let n = (2.0 / h).round() as i64;
    let m = (1.0 / h).round() as i64;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        for j in 0..=m {
            let p = [-1.0 + i as f64 * h, j as f64 * h];
            if a.local_constraint(x, &p) <= 0.0 {
                best = best.min(dist_sq(&p, y));
            }
        }
    }
    best.sqrt()
}

#[test]
fn projected_distance_matches_grid() {
    let a = inner(ConstraintModel::Exact);
    let x = [1.0, 1.0];
    let local = a.build(&x).unwrap();
    let ProxSmoothSet::Sublevel(s) = &local.set else { panic!() };
    for y in [[0.6, 0.9], [0.9, 0.95], [0.5, 0.4]] {
        let p = project_sublevel(s.pieces(), &y, SUBLEVEL_TOL).unwrap();
        let d = p.dist(&y);
        let g = grid_distance(&a, &x, &y, 2e-3);
        assert!(d <= g + 1e-12, "{d} vs grid {g}");
        assert!(g - d <= 2e-3, "{d} vs grid {g}");
    }
}

#[test]
fn parabola_condition_i_with_calibrated_tau() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for model in [ConstraintModel::Exact, ConstraintModel::Linearized] {
        let a = inner(model);
        for x in [[1.0, 1.0], [-0.7, 0.8]] {
            let v = a.check_condition_i(&x, 500, &mut rng).unwrap();
            assert!(v <= 1e-8, "{} at {x:?}: {v}", a.name());
            assert_eq!(a.check_condition_ii(&x, 100, &mut rng).unwrap(), 0.0);
        }
    }
}

#[test]
fn nu_matches_definition() {
    let p = ApproxParams { radius: 1.0, tau1: 1.0, r1: 0.5, tau2: 1.0, r2: f64::INFINITY };
    assert!((p.nu().unwrap() - 2.0).abs() < 1e-15);
    assert_eq!(ApproxParams::exact(f64::INFINITY).nu().unwrap(), 0.0);
    let bad = ApproxParams { r1: 1.0, ..p };
    assert!(bad.nu().is_err());
}

#[test]
fn kind_names_round_trip() {
    for k in ["identity", "tangent", "inner-exact", "inner-linear"] {
        assert_eq!(k.parse::<ApproxKind>().unwrap().name(), k);
    }
}

fn boundary_basepoint() -> impl Strategy<Value = [f64; 2]> {
    // Points on the two boundary arcs of the parabola region.
    (-1.0f64..1.0, any::<bool>()).prop_map(|(t, upper)| {
        if upper {
            [t, 0.2 * t * t + 0.8]
        } else {
            [t, t * t]
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn two_sided_model_bound(x in boundary_basepoint(), dy in proptest::array::uniform2(-1.5f64..1.5)) {
        let y = [x[0] + dy[0], x[1] + dy[1]];
        for model in [ConstraintModel::Exact, ConstraintModel::Linearized] {
            let a = inner(model);
            let ProxSmoothSet::Sublevel(s) = a.set() else { unreachable!() };
            let models = a.constraint_models(&x, &y);
            for (q, gx) in s.pieces().iter().zip(models) {
                prop_assert!((gx - q.value(&y)).abs() <= 0.5 * a.gamma() * dist_sq(&x, &y) + 1e-10);
            }
        }
    }

    #[test]
    fn tangent_retraction_is_feasible_and_close(seed in any::<u64>(), scale in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 3 + (seed % 8) as usize;
        let a = SetApproximation::tangent_sphere(dim, 0.5).unwrap();
        let x = sphere_point(&mut rng, dim);
        let ProxSmoothSet::Affine(plane) = a.build(&x).unwrap().set else { unreachable!() };
        let v = plane.project_direction(&crate::rng::gaussian_vector(&mut rng, dim)).scale(scale);
        let y = x.add(&v);
        let r = a.retract(&x, &y).unwrap();
        prop_assert!(a.set().contains(&r, 1e-9));
        prop_assert!(r.dist(&y) <= 0.5 * dist_sq(&x, &y) + 1e-10);
    }

    #[test]
    fn inner_retraction_is_feasible(x in boundary_basepoint(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = inner(ConstraintModel::Linearized);
        for y in a.sample_local_points(&x, 4, 0.5, &mut rng).unwrap() {
            let r = a.retract(&x, &y).unwrap();
            prop_assert!(a.set().contains(&r, 1e-9));
        }
    }
}
