use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::max_value;

#[test]
fn parabola_basepoints() {
    let p = parabolas2d().unwrap();
    let ProxSmoothSet::Sublevel(s) = &p.set else { panic!() };
    let g = s.pieces();
    assert_eq!(g[0].value(&[1.0, 1.0]), 0.0);
    assert!(g[1].value(&[1.0, 1.0]).abs() < 1e-15);
    assert!((g[0].value(&[-0.7, 0.8]) + 0.31).abs() < 1e-15);
    assert_eq!(p.approximations.len(), 2);
    assert_eq!(p.approximation(ApproxKind::FunctionalInner(ConstraintModel::Exact)).unwrap().gamma(), 0.5);
    assert_eq!(p.approximation(ApproxKind::FunctionalInner(ConstraintModel::Linearized)).unwrap().gamma(), 2.2);
}

#[test]
fn quartic_at_half() {
    let p = quartic1d(0.0).unwrap();
    assert_eq!(p.objective.value(&[0.5]), 0.75);
    // The subgradient of |x² − 1| at 0.5 is −2x = −1.
    assert_eq!(p.objective.mean_subgradient(&[0.5])[0], -1.0);
}

#[test]
fn unknown_problem() {
    assert!(matches!(get_problem("nope"), Err(Error::UnknownProblem(_))));
    for id in PROBLEM_IDS {
        assert_eq!(get_problem(id).unwrap().id, id);
    }
}

#[test]
fn registered_problems_pass_validation() {
    for id in PROBLEM_IDS {
        let p = get_problem(id).unwrap();
        let r = validate_constants(&p, 400, 1);
        assert!(r.passes(1e-8), "{id}: {:?}", r.entries);
        for name in ["lipschitz", "rho", "mu", "eta", "delta"] {
            assert!(r.get(name).is_some(), "{id} lacks {name}");
        }
    }
}

#[test]
fn halved_lipschitz_is_caught() {
    for id in PROBLEM_IDS {
        let p = get_problem(id).unwrap().with_scaled_lipschitz(0.5);
        let r = validate_constants(&p, 400, 1);
        assert!(r.get("lipschitz").unwrap() > 1e-3, "{id}: {:?}", r.entries);
    }
}

#[test]
fn quartic_weak_convexity_is_tight() {
    let mut p = quartic1d(0.5).unwrap();
    p.constants.rho = 1.5;
    let r = validate_constants(&p, 400, 2);
    assert!(r.get("rho").unwrap() > 1e-3);
}

#[test]
fn phase_constants_from_data() {
    let p = sphere_phase(10, 30, PHASE_SEED).unwrap();
    let c = p.constants;
    assert_eq!(c.eta, c.lipschitz);
    assert!(c.mu > 0.0 && c.mu <= c.lipschitz);
    assert!((c.delta - p.objective.value(&p.x0)).abs() == 0.0);
    // The planted point is a global minimizer.
    assert!(p.objective.value(&p.basepoints[1]) < 1e-12);
    let again = sphere_phase(10, 30, PHASE_SEED).unwrap();
    assert_eq!(again.x0, p.x0);
}

#[test]
fn parabola_delta_matches_grid() {
    let p = parabolas2d().unwrap();
    let gap = super::delta_gap(&p);
    assert!(gap <= 0.0 && gap > -1e-5, "{gap}");
}

#[test]
fn inner_sets_stay_inside_at_boundary_basepoints() {
    let p = parabolas2d().unwrap();
    let ProxSmoothSet::Sublevel(s) = &p.set else { panic!() };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut basepoints = p.basepoints.clone();
    for k in 0..100 {
        let t = -1.0 + 2.0 * (k as f64 + 0.5) / 100.0;
        basepoints.push(if k % 2 == 0 {
            Vector::from([t, t * t])
        } else {
            Vector::from([t, 0.2 * t * t + 0.8])
        });
    }
    for approx in &p.approximations {
        for x in &basepoints {
            for y in approx.sample_local_points(x, 40, 1.0, &mut rng).unwrap() {
                assert!(max_value(s.pieces(), &y).0 <= 1e-9, "{} at {x:?}: {y:?}", approx.name());
            }
        }
    }
}

#[test]
fn metadata_lists_approximations() {
    let m = parabolas2d().unwrap().metadata();
    assert_eq!(m.approximations.len(), 2);
    assert_eq!(m.approximations[0].kind, "inner-exact");
    assert_eq!(m.approximations[1].tau1, PARABOLA_TAU1_LINEAR);
    assert_eq!(m.dim, 2);
}
