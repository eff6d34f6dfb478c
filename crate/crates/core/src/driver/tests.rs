use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::approximations::{ApproxParams, SetApproximation};
use crate::geometry::BoxSet;
use crate::models::losses::{AbsQuadratic, Linear};
use crate::models::ModelConstants;

fn consts(l: f64, eta: f64, mu: f64, rho: f64) -> ModelConstants {
    ModelConstants {
        lipschitz: l,
        model_weak_convexity: eta,
        accuracy: mu,
        weak_convexity: rho,
    }
}

fn theorem(l: f64, eta: f64, mu: f64, delta: f64, approx: ApproxParams) -> TheoremConstants {
    TheoremConstants {
        lipschitz: l,
        eta,
        mu,
        delta,
        approx,
        alpha: None,
        rho_bar: None,
    }
}

fn interval() -> ProxSmoothSet {
    ProxSmoothSet::Box(BoxSet::interval(-1.0, 1.0).unwrap())
}

fn noisy_quartic(sigma: f64) -> StochasticObjective {
    let loss = Arc::new(AbsQuadratic::new(vec![Vector::from([1.0])], vec![1.0]));
    let noise = vec![Vector::from([-sigma]), Vector::from([0.0]), Vector::from([sigma])];
    StochasticObjective::with_subgradient_noise(loss, noise, consts(4.0 + sigma, 2.0, 2.0, 2.0)).unwrap()
}

fn quartic_config(seed: u64, horizon: usize, family: ModelFamily) -> RunConfig {
    let c = theorem(4.5, 2.0, 2.0, 3.0, ApproxParams::exact(f64::INFINITY));
    let s = theorem_schedule(ScheduleKind::ConstantTheorem41, &c, horizon).unwrap();
    RunConfig::new(family, seed, s, Vector::from([2.0]))
}

fn quartic_set() -> ProxSmoothSet {
    ProxSmoothSet::Box(BoxSet::interval(-2.0, 2.0).unwrap())
}

#[test]
fn linear_objective_first_step() {
    let obj = StochasticObjective::uniform(
        Arc::new(Linear::new(vec![Vector::from([1.0])], vec![0.0])),
        consts(1.0, 0.0, 0.0, 0.0),
    );
    let s = StepSchedule::custom(vec![10.0; 3], 0.0, 1.0).unwrap();
    let cfg = RunConfig::new(ModelFamily::Subgradient, 1, s, Vector::from([1.0]));
    let log = run_algorithm1(&cfg, &obj, &interval()).unwrap();
    assert!((log.iterates[1][0] - 0.9).abs() < 1e-15);
    assert!((log.iterates[3][0] - 0.7).abs() < 1e-14);
}

#[test]
fn constant_objective_never_moves() {
    let obj = StochasticObjective::uniform(
        Arc::new(Linear::new(vec![Vector::from([0.0])], vec![3.0])),
        consts(0.0, 0.0, 0.0, 0.0),
    );
    let s = StepSchedule::custom(vec![2.0; 20], 0.0, 1.0).unwrap();
    for family in [ModelFamily::ProxPoint, ModelFamily::Subgradient] {
        let cfg = RunConfig::new(family, 5, s.clone(), Vector::from([0.25]));
        let log = run_algorithm1(&cfg, &obj, &interval()).unwrap();
        assert!(log.iterates.iter().all(|x| x[0] == 0.25));
    }
}

#[test]
fn tstar_probability_examples() {
    let p = tstar_probabilities(&[3.0; 5], 1.0).unwrap();
    assert!(p.iter().all(|v| (v - 0.2).abs() < 1e-15));
    let p = tstar_probabilities(&[2.0, 4.0], 1.0).unwrap();
    assert!((p[0] - 0.75).abs() < 1e-15 && (p[1] - 0.25).abs() < 1e-15);
    for seed in 0..20 {
        assert_eq!(sample_tstar(&[5.0], 1.0, &CounterRng::new(seed)).unwrap(), 0);
    }
    assert!(matches!(
        tstar_probabilities(&[2.0, 1.0], 1.0),
        Err(Error::InvalidWeights { .. })
    ));
}

#[test]
fn tstar_frequencies_follow_weights() {
    let betas = [2.0, 4.0];
    let hits = (0..20_000u64)
        .filter(|&s| sample_tstar(&betas, 1.0, &CounterRng::new(s)).unwrap() == 0)
        .count();
    let freq = hits as f64 / 20_000.0;
    // Four standard deviations of a Bernoulli(0.75) mean over 20000 draws.
    assert!((freq - 0.75).abs() < 4.0 * (0.75f64 * 0.25 / 20_000.0).sqrt());
}

#[test]
fn constant_schedule_examples() {
    let c = theorem(1.0, 1.0, 1.0, 1.0, ApproxParams::exact(f64::INFINITY));
    let s = theorem_schedule(ScheduleKind::ConstantTheorem41, &c, 3).unwrap();
    assert_eq!(s.rho_bar(), 4.0);
    assert_eq!(s.gamma(), 1.0);
    assert_eq!(s.betas().len(), 4);
    assert!(s.betas().iter().all(|b| (b - 8f64.sqrt()).abs() < 1e-15));

    let zero = theorem(0.0, 1.0, 1.0, 1.0, ApproxParams::exact(f64::INFINITY));
    let s = theorem_schedule(ScheduleKind::ConstantTheorem41, &zero, 3).unwrap();
    assert!(s.betas().iter().all(|b| *b == 1.0));

    let sphere = theorem(2.0, 1.0, 1.0, 1.0, ApproxParams::exact(1.0));
    assert_eq!(sphere.gamma_alg1(), 7.0);
}

#[test]
fn sqrt_schedule_examples() {
    let p = ApproxParams { radius: 1.0, tau1: 1.0, r1: 0.5, tau2: 1.0, r2: f64::INFINITY };
    let mut c = theorem(2.0, 1.0, 0.5, 1.0, p);
    assert_eq!(c.gamma_alg2().unwrap(), 1.0 + 6.0 * 2.0);
    c.alpha = Some(0.5);
    let s = theorem_schedule(ScheduleKind::SqrtTheorem61, &c, 15).unwrap();
    assert!(s.betas().iter().all(|b| (b - (13.0 + 8.0)).abs() < 1e-13));
    // floor = max{2L/r1, γ + μ + 3τ1L} = max{8, 19.5}
    assert_eq!(c.rho_bar_floor_alg2().unwrap(), 19.5);
    assert_eq!(s.rho_bar(), 39.0);

    // With r2 finite and 2L − γ r2 > 0 the bound on α binds.
    let tight = ApproxParams { r2: 0.1, ..p };
    let mut c2 = theorem(2.0, 1.0, 0.5, 1.0, tight);
    c2.alpha = Some(1.0);
    assert!(theorem_schedule(ScheduleKind::SqrtTheorem61, &c2, 3).is_err());
    c2.alpha = Some(0.03); // bound is 0.1 / (4 − 1.3)
    assert!(theorem_schedule(ScheduleKind::SqrtTheorem61, &c2, 3).is_ok());
    c.alpha = None;
    assert!(theorem_schedule(ScheduleKind::SqrtTheorem61, &c, 3).is_err());
}

#[test]
fn closed_form_bound_example() {
    let c = theorem(1.0, 1.0, 1.0, 1.0, ApproxParams::exact(f64::INFINITY));
    let b = theorem_bound(ScheduleKind::ConstantTheorem41, &c, 3).unwrap();
    assert!((b - 2f64.sqrt()).abs() < 1e-15);
    // First branch: large Δ relative to L.
    let c = theorem(0.01, 1.0, 1.0, 100.0, ApproxParams::exact(f64::INFINITY));
    let b = theorem_bound(ScheduleKind::ConstantTheorem41, &c, 3).unwrap();
    assert!((b - 4.0 * 100.0 / 4.0).abs() < 1e-12);
}

/// Direct transcription of the general right-hand sides, one term at a time.
fn oracle_bound_alg1(l: f64, mu: f64, delta: f64, gamma: f64, rho: f64, betas: &[f64]) -> f64 {
    let mut num = rho * delta;
    let mut den = 0.0;
    for b in betas {
        num += rho * rho * l * l / 2.0 / b / (b - gamma);
        den += (rho - gamma - mu) / (b - gamma);
    }
    num / den
}

#[test]
fn general_bound_alg1_matches_transcription() {
    let c = theorem(4.5, 2.0, 2.0, 3.0, ApproxParams::exact(f64::INFINITY));
    let s = theorem_schedule(ScheduleKind::ConstantTheorem41, &c, 100).unwrap();
    let got = general_bound_alg1(&c, &s).unwrap();
    let want = oracle_bound_alg1(4.5, 2.0, 3.0, 2.0, 8.0, s.betas());
    assert!((got - want).abs() <= 1e-12 * want);
    let closed = theorem_bound(ScheduleKind::ConstantTheorem41, &c, 100).unwrap();
    // The closed form undercuts the general right-hand side by about a factor two.
    assert!(got > 1.8 * closed && got < 2.2 * closed, "{got} vs {closed}");
}

#[test]
fn retraction_coefficient_reduces_without_retraction() {
    let p = ApproxParams { radius: f64::INFINITY, tau1: 1.0, r1: 0.5, tau2: 0.0, r2: f64::INFINITY };
    let c = theorem(3.0, 1.0, 1.0, 1.0, p);
    for beta in [2.0, 10.0, 1e3] {
        let a = retraction_coefficient(&c, beta, 1.0, 5.0);
        assert_eq!(a, 1.0 / (beta * (beta - 1.0)));
    }
}

#[test]
fn sqrt_bound_matches_transcription() {
    let p = ApproxParams { radius: 1.0, tau1: 1.0, r1: 0.5, tau2: 1.0, r2: f64::INFINITY };
    let mut c = theorem(2.0, 1.0, 0.5, 1.5, p);
    c.alpha = Some(0.3);
    let t = 40;
    let got = theorem_bound(ScheduleKind::SqrtTheorem61, &c, t).unwrap();
    let (l, gamma, rho) = (2.0f64, 13.0f64, 39.0f64);
    let beta = gamma + ((t + 1) as f64).sqrt() / 0.3;
    let a = 1.0 / (beta * (beta - gamma))
        + 8.0 * l * (1.0 / rho + 1.0 / beta) / beta.powi(2)
        + 4.0 * l * l / beta.powi(4);
    let n = (t + 1) as f64;
    let want = (2.0 * rho * 1.5 + rho * rho * l * l * n * a) / (n * (rho - gamma - 0.5 - 3.0 * l) / (beta - gamma));
    assert!((got - want).abs() <= 1e-12 * want);
}

#[test]
fn identity_approximation_reproduces_algorithm1() {
    let obj = noisy_quartic(0.5);
    let set = quartic_set();
    let approx = SetApproximation::identity(set.clone());
    for seed in 0..5 {
        let cfg = quartic_config(seed, 200, ModelFamily::Subgradient);
        let a = run_algorithm1(&cfg, &obj, &set).unwrap();
        let b = run_algorithm2(&cfg, &obj, &approx).unwrap();
        assert_eq!(a.t_star, b.t_star);
        for (x, y) in a.iterates.iter().zip(&b.iterates) {
            assert_eq!(x[0].to_bits(), y[0].to_bits());
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let obj = noisy_quartic(0.5);
    let cfg = quartic_config(42, 300, ModelFamily::ProxLinear);
    let a = run_algorithm1(&cfg, &obj, &quartic_set()).unwrap();
    let b = run_algorithm1(&cfg, &obj, &quartic_set()).unwrap();
    assert_eq!(a.iterates, b.iterates);
    assert_eq!(a.t_star, b.t_star);
    let xis: Vec<usize> = a.steps.iter().map(|s| s.xi).collect();
    assert_eq!(xis, b.steps.iter().map(|s| s.xi).collect::<Vec<_>>());
    assert!(xis.iter().all(|&x| x < 3));
}

#[test]
fn tangent_step_closed_form() {
    let g = Vector::from([0.0, 0.6, -0.8]);
    let obj = StochasticObjective::uniform(
        Arc::new(Linear::new(vec![g.clone()], vec![0.0])),
        consts(1.0, 0.0, 0.0, 0.0),
    );
    let approx = SetApproximation::tangent_sphere(3, 0.5).unwrap();
    let x = Vector::basis(3, 0);
    let beta = 4.0;
    let (_, next, _) = retracted_step(&obj, &approx, ModelFamily::Subgradient, &x, 0, beta, 1e-12).unwrap();
    let y = x.add_scaled(-1.0 / beta, &g);
    let want = y.scale(1.0 / y.norm());
    assert!(next.dist(&want) < 1e-15);
}

#[test]
fn schedule_below_gamma_is_rejected() {
    let obj = noisy_quartic(0.5);
    let s = StepSchedule::custom(vec![1.0; 4], 2.0, 8.0).unwrap();
    let cfg = RunConfig::new(ModelFamily::Subgradient, 1, s, Vector::from([2.0]));
    assert!(matches!(
        run_algorithm1(&cfg, &obj, &quartic_set()),
        Err(Error::InvalidSchedule(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn iterates_stay_feasible_with_bounded_steps(seed in any::<u64>(), family in prop::sample::select(vec![
        ModelFamily::ProxPoint, ModelFamily::Subgradient, ModelFamily::ProxLinear,
    ])) {
        let obj = noisy_quartic(0.5);
        let cfg = quartic_config(seed, 100, family);
        let log = run_algorithm1(&cfg, &obj, &quartic_set()).unwrap();
        prop_assert_eq!(log.iterates.len(), 102);
        prop_assert!(log.t_star <= 100);
        for (t, s) in log.steps.iter().enumerate() {
            prop_assert!(s.dist_to_set <= 1e-9);
            prop_assert!(s.step_norm <= 2.0 * 4.5 / s.beta + 1e-8, "t = {}", t);
            prop_assert!(s.prox_gradient_norm <= 2.0 * 4.5 + 10.0 * cfg.tol * s.beta);
        }
    }
}

#[test]
fn csv_round_trips_iterates() {
    let obj = noisy_quartic(0.5);
    let cfg = quartic_config(3, 20, ModelFamily::Subgradient);
    let log = run_algorithm1(&cfg, &obj, &quartic_set()).unwrap();
    let text = csv::iterates_csv(&log);
    assert_eq!(csv::parse_iterates(&text).unwrap(), log.iterates);
    let traj = csv::trajectory_csv(&log);
    assert!(traj.starts_with("t,beta,f,dist_X,step_norm,xi_index\n"));
    assert_eq!(traj.lines().count(), 22);
    assert_eq!(csv::float(0.1), "1.0000000000000001e-1");
}
