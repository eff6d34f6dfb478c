//! Every shipped problem with every supported model family and approximation.

use proxsmooth::approximations::ApproxKind;
use proxsmooth::driver::csv::{iterates_csv, parse_iterates};
use proxsmooth::experiment::{Algorithm, Experiment, ExperimentSpec};
use proxsmooth::problems::{get_problem, PROBLEM_IDS};
use proxsmooth::Error;

#[test]
fn supported_configurations_run_feasibly() {
    let mut ran = 0;
    for id in PROBLEM_IDS {
        let bundle = get_problem(id).unwrap();
        let mut specs = Vec::new();
        for &family in &bundle.families {
            specs.push(ExperimentSpec::new(Algorithm::Plain, family, 20));
            for a in &bundle.approximations {
                specs.push(ExperimentSpec::new(Algorithm::Retracted, family, 20).with_approx(a.kind()));
            }
        }
        for spec in specs {
            let label = format!("{id} {:?} {:?} {:?}", spec.algorithm, spec.family, spec.approx);
            let e = Experiment::new(bundle.clone(), spec).unwrap();
            let log = match e.run(4) {
                Err(Error::Unsupported(_)) => continue,
                r => r.unwrap_or_else(|err| panic!("{label}: {err}")),
            };
            ran += 1;
            for x in &log.iterates {
                assert!(bundle.set.distance(x).unwrap() <= 1e-9, "{label}");
            }
            let slack = 10.0 * e.spec.tol;
            for s in &log.steps {
                assert!(s.prox_gradient_norm <= 2.0 * e.constants.lipschitz + slack * s.beta, "{label}");
            }
            assert!(log.t_star <= 20);
            assert_eq!(parse_iterates(&iterates_csv(&log)).unwrap(), log.iterates);
        }
    }
    assert!(ran >= 15, "only {ran} configurations ran");
}

#[test]
fn identity_approximation_matches_plain_method_everywhere_it_applies() {
    for id in ["quartic1d", "sphere-phase"] {
        let bundle = get_problem(id).unwrap();
        let mut spec = ExperimentSpec::new(Algorithm::Plain, bundle.families[0], 50);
        let plain = Experiment::new(bundle.clone(), spec.clone()).unwrap();
        spec.algorithm = Algorithm::Retracted;
        spec.approx = Some(ApproxKind::Identity);
        spec.schedule = plain.spec.schedule;
        let retracted = Experiment::new(bundle, spec).unwrap();
        for seed in 0..3 {
            assert_eq!(plain.run(seed).unwrap().iterates, retracted.run(seed).unwrap().iterates, "{id}");
        }
    }
}
