//! `verify`: the inequality checks, run across the registered problems.

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use proxsmooth::approximations::ApproxKind;
use proxsmooth::diagnostics::{
    check_one_step_alg1, check_one_step_alg2, check_three_point, moreau_prox,
};
use proxsmooth::experiment::{Algorithm, Experiment, ExperimentSpec};
use proxsmooth::geometry::sampling::sample_near;
use proxsmooth::geometry::ProxSmoothSet;
use proxsmooth::models::{Model, ModelFamily};
use proxsmooth::problems::{validate_constants, ProblemBundle, PROBLEM_IDS};
use proxsmooth::subsolver::{solve, SubproblemSpec};
use proxsmooth::{Error, Result, Vector};

use crate::{CliError, Options};

/// Violations above this fail a check.
pub const VERIFY_TOL: f64 = 1e-8;
const SEED: u64 = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    ThreePoint,
    ProxBound,
    Conditions,
    OneStep,
    ModelAccuracy,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::ThreePoint => "three-point",
            CheckKind::ProxBound => "prox-bound",
            CheckKind::Conditions => "conditions",
            CheckKind::OneStep => "one-step",
            CheckKind::ModelAccuracy => "model-accuracy",
        }
    }
}

/// Largest violation found, or why the check could not run.
pub type Outcome = std::result::Result<Option<f64>, String>;

pub fn run_check(kind: CheckKind, bundle: &ProblemBundle) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let r = match kind {
        CheckKind::ThreePoint => three_point(bundle, &mut rng),
        CheckKind::ProxBound => prox_bound(bundle),
        CheckKind::Conditions => conditions(bundle, &mut rng),
        CheckKind::OneStep => one_step(bundle, &mut rng),
        CheckKind::ModelAccuracy => Ok(Some(validate_constants(bundle, 1000, SEED).max_violation())),
    };
    r.map_err(|e| e.to_string())
}

fn reach(bundle: &ProblemBundle) -> f64 {
    bundle.set.bounding_box().map_or(2.0, |(lo, hi)| lo.dist(&hi))
}

fn fold_max(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |a| a.max(v)))
}

/// Sets to test the three-point inequality on, with their radius `R`, and
/// basepoints on each: `X` itself when the solvers handle it, otherwise the
/// (convex) local approximations at the problem's basepoints.
fn three_point_sets(bundle: &ProblemBundle, rng: &mut ChaCha8Rng) -> Result<Vec<(ProxSmoothSet, f64, Vec<Vector>)>> {
    let direct = bundle.set.is_convex() || matches!(bundle.set, ProxSmoothSet::UnitSphere(_));
    if direct {
        let points = (0..20).map(|_| sample_near(&bundle.set, &bundle.x0, reach(bundle), rng)).collect();
        return Ok(vec![(bundle.set.clone(), bundle.constants.radius, points)]);
    }
    let mut out = Vec::new();
    for approx in &bundle.approximations {
        for x in &bundle.basepoints {
            out.push((approx.build(x)?.set, f64::INFINITY, vec![x.clone()]));
        }
    }
    Ok(out)
}

fn three_point(bundle: &ProblemBundle, rng: &mut ChaCha8Rng) -> Result<Option<f64>> {
    let c = &bundle.constants;
    let mut worst = None;
    for (set, radius, points) in three_point_sets(bundle, rng)? {
        for x in points {
            // The most exact model the solvers support on this set.
            let mut done = false;
            for family in [ModelFamily::ProxPoint, ModelFamily::Subgradient] {
                let model = Model::new(&bundle.objective, family, &x, 0)?;
                let rho = if family == ModelFamily::ProxPoint { c.rho } else { c.eta };
                let floor = rho + if radius.is_finite() { 3.0 * c.lipschitz / radius } else { 0.0 };
                let beta = floor + rng.random_range(0.1..50.0);
                match solve(&SubproblemSpec::new(&model, &set, beta)) {
                    Err(Error::Unsupported(_)) => continue,
                    Err(e) => return Err(e),
                    Ok(_) => {}
                }
                let v = check_three_point(&model, &set, beta, rho, c.lipschitz, radius, 200, rng)?;
                worst = fold_max(worst, v);
                done = true;
                break;
            }
            if !done {
                return Err(Error::Unsupported("no model family is solvable here".into()));
            }
        }
    }
    Ok(worst)
}

/// Short runs of every supported configuration.
fn experiments(bundle: &ProblemBundle, horizon: usize) -> Result<Vec<Experiment>> {
    let mut out = Vec::new();
    for &family in &bundle.families {
        let spec = ExperimentSpec::new(Algorithm::Plain, family, horizon);
        out.push(spec);
        for a in &bundle.approximations {
            if a.kind() != ApproxKind::Identity {
                out.push(ExperimentSpec::new(Algorithm::Retracted, family, horizon).with_approx(a.kind()));
            }
        }
    }
    out.into_iter()
        .map(|spec| Experiment::new(bundle.clone(), spec))
        .collect()
}

fn prox_bound(bundle: &ProblemBundle) -> Result<Option<f64>> {
    let mut worst = None;
    for e in experiments(bundle, 30)? {
        let log = match e.run(1) {
            Err(Error::Unsupported(_)) => continue,
            r => r?,
        };
        let slack = 10.0 * e.spec.tol;
        for s in &log.steps {
            worst = fold_max(worst, s.prox_gradient_norm - 2.0 * e.constants.lipschitz - slack * s.beta);
        }
    }
    Ok(worst)
}

fn conditions(bundle: &ProblemBundle, rng: &mut ChaCha8Rng) -> Result<Option<f64>> {
    let mut worst = None;
    for approx in &bundle.approximations {
        if approx.kind() == ApproxKind::Identity {
            continue;
        }
        for x in &bundle.basepoints {
            worst = fold_max(worst, approx.check_condition_i(x, 2000, rng)?);
            worst = fold_max(worst, approx.check_condition_ii(x, 2000, rng)?);
        }
    }
    Ok(worst)
}

fn one_step(bundle: &ProblemBundle, rng: &mut ChaCha8Rng) -> Result<Option<f64>> {
    let mut worst = None;
    let families = &bundle.families;
    let plain_ok = bundle.set.is_convex() || matches!(bundle.set, ProxSmoothSet::UnitSphere(_));
    if plain_ok {
        let c = bundle.theorem_constants(None);
        let (gamma, rho_bar) = (c.gamma_alg1(), c.rho_bar_alg1());
        let prox_cfg = &bundle.oracle;
        for k in 0..10 {
            let x = sample_near(&bundle.set, &bundle.x0, reach(bundle), rng);
            let beta = gamma + rng.random_range(0.01..100.0);
            let family = families[k % families.len()];
            let prox = moreau_prox(&bundle.objective, &bundle.set, 1.0 / rho_bar, &x, prox_cfg)?;
            match check_one_step_alg1(&bundle.objective, &bundle.set, family, &x, beta, gamma, rho_bar, &prox, 1e-12) {
                Err(Error::Unsupported(_)) => continue,
                r => worst = fold_max(worst, r?.violation()),
            }
        }
    }
    for approx in &bundle.approximations {
        if approx.kind() == ApproxKind::Identity {
            continue;
        }
        let c = bundle.theorem_constants(Some(approx));
        let (gamma, rho_bar, floor) = (c.gamma_alg2()?, c.rho_bar_alg2()?, c.beta_floor_alg2()?);
        for k in 0..5 {
            let x = sample_near(&bundle.set, &bundle.x0, reach(bundle), rng);
            let beta = floor + rng.random_range(0.01..100.0);
            let family = families[k % families.len()];
            let prox = moreau_prox(&bundle.objective, &bundle.set, 1.0 / rho_bar, &x, &bundle.oracle)?;
            match check_one_step_alg2(&bundle.objective, approx, family, &x, beta, &c, gamma, rho_bar, &prox, 1e-12) {
                Err(Error::Unsupported(_)) => continue,
                r => worst = fold_max(worst, r?.violation()),
            }
        }
    }
    Ok(worst)
}

pub fn cmd_verify(o: &Options) -> std::result::Result<(), CliError> {
    let ids: Vec<&str> = match &o.problem {
        Some(p) => vec![p.as_str()],
        None => PROBLEM_IDS.to_vec(),
    };
    let checks: Vec<CheckKind> = match o.check {
        Some(c) => vec![c],
        None => CheckKind::value_variants().to_vec(),
    };
    println!("{:<14} {:<16} {:>14}  status", "problem", "check", "max_violation");
    let mut failures = 0;
    for id in ids {
        let bundle = o.bundle(id)?;
        for &check in &checks {
            let outcome = run_check(check, &bundle);
            let (shown, ok) = match &outcome {
                Ok(Some(v)) => (format!("{v:.3e}"), *v <= VERIFY_TOL),
                Ok(None) => ("n/a".to_string(), true),
                Err(msg) => (format!("error: {msg}"), false),
            };
            if !ok {
                failures += 1;
            }
            let status = if ok { "PASS" } else { "FAIL" };
            println!("{id:<14} {:<16} {shown:>14}  {status}", check.name());
        }
    }
    if failures > 0 {
        return Err(CliError::VerifyFailed(failures));
    }
    Ok(())
}
