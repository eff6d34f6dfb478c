use proptest::prelude::*;

use super::*;

fn circle_grid_nearest(y: &[f64], spacing: f64) -> Vector {
    let n = (2.0 * std::f64::consts::PI / spacing).ceil() as usize;
    let mut best = (f64::INFINITY, Vector::zeros(2));
    for k in 0..n {
        let th = k as f64 * spacing;
        let p = Vector::from([th.cos(), th.sin()]);
        let d = p.dist(y);
        if d < best.0 {
            best = (d, p);
        }
    }
    best.1
}

#[test]
fn sphere_projection_examples() {
    let s = ProxSmoothSet::unit_sphere(2);
    assert_eq!(s.project(&[2.0 - 1e-12, 0.0]).unwrap(), Vector::from([1.0, 0.0]));
    let p = s.project(&[0.3, 0.4]).unwrap();
    let oracle = circle_grid_nearest(&[0.3, 0.4], 1e-5);
    assert!(p.dist(&oracle) < 1e-5);
    assert!(p.dist(&[0.6, 0.8]) < 1e-15);
    assert_eq!(s.project(&[0.0, 0.0]).unwrap_err(), Error::ZeroVector);
    assert!((s.distance(&[0.0, 0.5]).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn sphere_projection_outside_tube_is_rejected() {
    let s = ProxSmoothSet::unit_sphere(2);
    assert!(matches!(
        s.project(&[2.0, 0.0]),
        Err(Error::OutsideTube { .. })
    ));
}

#[test]
fn box_projection_examples() {
    let b = ProxSmoothSet::interval(-2.0, 2.0).unwrap();
    assert_eq!(b.project(&[3.0]).unwrap(), Vector::from([2.0]));
    assert_eq!(b.distance(&[3.0]).unwrap(), 1.0);
    assert_eq!(b.distance(&[-0.5]).unwrap(), 0.0);
}

#[test]
fn affine_distance_matches_orthogonal_decomposition() {
    // {y : ⟨e1, y − e1⟩ = 0} in R²; the normal component of y − base is the distance.
    let a = ProxSmoothSet::Affine(
        AffineSubspace::hyperplane(Vector::from([1.0, 0.0]), &[1.0, 0.0]).unwrap(),
    );
    let y = [1.5, 2.0];
    let normal_part = dot(&[1.0, 0.0], &[y[0] - 1.0, y[1]]);
    assert!((a.distance(&y).unwrap() - normal_part.abs()).abs() < 1e-15);
    assert!((a.distance(&y).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn sphere_tangent_is_orthonormal_and_contains_base() {
    let x = Vector::from([0.48, -0.6, 0.64]);
    let t = AffineSubspace::sphere_tangent(&x).unwrap();
    assert_eq!(t.basis().len(), 2);
    for u in t.basis() {
        assert!(dot(u, &x).abs() < 1e-15);
    }
    assert!(AffineSubspace::new(x.clone(), vec![Vector::from([1.0, 1.0, 0.0])]).is_err());
}

fn ball_constraint(dim: usize) -> Quadratic {
    Quadratic::isotropic(2.0, &vec![0.0; dim]).add_scaled(1.0, &Quadratic::affine(Vector::zeros(dim), -1.0))
}

#[test]
fn project_sublevel_examples() {
    let p = project_sublevel(&[ball_constraint(2)], &[2.0, 0.0], 1e-12).unwrap();
    assert!(p.dist(&[1.0, 0.0]) < 1e-12);
    let half = Quadratic::affine(Vector::from([1.0, 0.0]), 0.0);
    let p = project_sublevel(&[half], &[1.0, 1.0], 1e-12).unwrap();
    assert!(p.dist(&[0.0, 1.0]) < 1e-12);
}

fn parabola_pieces() -> Vec<Quadratic> {
    vec![
        Quadratic::diagonal(&[2.0, 0.0], Vector::from([0.0, -1.0]), 0.0).unwrap(),
        Quadratic::diagonal(&[-0.4, 0.0], Vector::from([0.0, 1.0]), -0.8).unwrap(),
    ]
}

/// Nearest feasible grid point: coarse pass at `10·h`, then a fine pass at `h`
/// around the coarse winner.
fn region_grid_nearest(pieces: &[Quadratic], z: &[f64], h: f64) -> Vector {
    let scan = |lo: [f64; 2], hi: [f64; 2], step: f64| {
        let nx = ((hi[0] - lo[0]) / step).round() as i64;
        let ny = ((hi[1] - lo[1]) / step).round() as i64;
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for i in 0..=nx {
            for j in 0..=ny {
                let p = [lo[0] + i as f64 * step, lo[1] + j as f64 * step];
                if max_value(pieces, &p).0 <= 0.0 {
                    let d = (p[0] - z[0]).hypot(p[1] - z[1]);
                    if d < best.0 {
                        best = (d, p);
                    }
                }
            }
        }
        best.1
    };
    let c = scan([-1.0, 0.0], [1.0, 1.0], 10.0 * h);
    let w = 20.0 * h;
    Vector::from(scan([c[0] - w, c[1] - w], [c[0] + w, c[1] + w], h))
}

#[test]
fn project_sublevel_parabola_region_matches_grid() {
    let pieces = parabola_pieces();
    let z = [0.0, 2.0];
    let p = project_sublevel(&pieces, &z, 1e-12).unwrap();
    let oracle = region_grid_nearest(&pieces, &z, 1e-4);
    assert!(max_value(&pieces, &p).0 <= 1e-12);
    assert!(p.dist(&z) <= oracle.dist(&z) + 1e-12);
    assert!(p.dist(&oracle) < 2e-4);
    assert!(p.dist(&[0.0, 0.8]) < 1e-10);
}

#[test]
fn nonconvex_sublevel_declares_radius() {
    let s = SublevelSet::with_radius(parabola_pieces(), 2.5).unwrap();
    assert!(!s.is_convex());
    let set = ProxSmoothSet::Sublevel(s);
    assert_eq!(set.proximal_radius(), 2.5);
    assert!(set.contains(&[1.0, 1.0], 0.0));
    assert!(!set.contains(&[0.0, 0.9], 1e-9));
    assert!(SublevelSet::convex(parabola_pieces()).is_err());
}

fn tube_point(r: f64) -> impl Strategy<Value = Vector> {
    (0.0..std::f64::consts::TAU, -r..r).prop_map(|(th, s)| {
        Vector::from([(1.0 + s) * th.cos(), (1.0 + s) * th.sin()])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn sphere_projection_single_valued(y in tube_point(0.9)) {
        let s = ProxSmoothSet::unit_sphere(2);
        prop_assert_eq!(s.project(&y).unwrap(), s.project(&y).unwrap());
    }

    #[test]
    fn sphere_projector_lipschitz(r in 0.05f64..0.95, a in tube_point(1.0), b in tube_point(1.0)) {
        let s = ProxSmoothSet::unit_sphere(2);
        let scale = |v: &Vector| {
            let n = v.norm();
            let shrunk = 1.0 + (n - 1.0).clamp(-r, r);
            v.scale(shrunk / n)
        };
        let (a, b) = (scale(&a), scale(&b));
        let pa = s.project(&a).unwrap();
        let pb = s.project(&b).unwrap();
        prop_assert!(pa.dist(&pb) <= 1.0 / (1.0 - r) * a.dist(&b) + 1e-10);
    }

    #[test]
    fn projection_idempotent(y in prop::collection::vec(-3.0f64..3.0, 3)) {
        let sets = [
            ProxSmoothSet::Box(BoxSet::new(Vector::from([-1.0, 0.0, -2.0]), Vector::from([1.0, 0.5, 2.0])).unwrap()),
            ProxSmoothSet::Ball(BallSet::new(Vector::from([0.5, 0.0, 0.0]), 1.2).unwrap()),
            ProxSmoothSet::Affine(AffineSubspace::hyperplane(Vector::from([0.0, 1.0, 0.0]), &[1.0, 2.0, -1.0]).unwrap()),
            ProxSmoothSet::Sublevel(SublevelSet::convex(vec![ball_constraint(3)]).unwrap()),
        ];
        for s in &sets {
            let p = s.project(&y).unwrap();
            prop_assert!(s.contains(&p, 1e-12));
            let pp = s.project(&p).unwrap();
            prop_assert!(pp.dist(&p) <= 1e-12);
        }
        let sphere = ProxSmoothSet::unit_sphere(3);
        let n = crate::vector::norm(&y);
        if n > 1e-3 && n < 2.0 {
            let p = sphere.project(&y).unwrap();
            prop_assert!(sphere.project(&p).unwrap().dist(&p) <= 1e-12);
        }
    }

    #[test]
    fn zero_distance_iff_contained(y in prop::collection::vec(-1.5f64..1.5, 2)) {
        let sets = [
            ProxSmoothSet::Box(BoxSet::new(Vector::from([-1.0, -1.0]), Vector::from([1.0, 0.2])).unwrap()),
            ProxSmoothSet::Ball(BallSet::new(Vector::from([0.0, 0.0]), 1.0).unwrap()),
            ProxSmoothSet::Sublevel(SublevelSet::with_radius(parabola_pieces(), 2.5).unwrap()),
        ];
        for s in &sets {
            let d = s.distance(&y).unwrap();
            if s.contains(&y, 0.0) {
                prop_assert_eq!(d, 0.0);
            } else {
                prop_assert!(d > 0.0);
                prop_assert!(!s.contains(&y, 1e-12) || d <= 1e-10);
            }
        }
    }
}
