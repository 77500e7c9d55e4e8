//! Randomized property suites shared by the `properties` and `acceptance`
//! test targets. Each suite runs `cases` deterministic proptest cases and
//! reports the first failure with its shrunk input.

use gpia_core::coupling::{
    estimate_coupling_probability, reflection_direction, reflection_matrix, CouplingParams, MarkovDiffusion,
};
use gpia_core::mc::{estimate_payoff, SimConfig};
use gpia_core::model::{
    build_example_class, check_assumption1, reference_problem, ActionSet, ControlProblem, ExampleClassConstants,
    ExampleClassSpec,
};
use gpia_core::pde::{solve_poisson, Grid, Policy};
use gpia_core::pia::{improve_policy, run_gpia, ArgminRule, GpiaConfig, ScalingFunction};
use gpia_core::Execution;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use std::sync::Arc;

pub type SuiteResult = Result<(), String>;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn finish<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> SuiteResult {
    r.map_err(|e| e.to_string())
}

/// The reflection `I - 2 u u^T` built from a random nonsingular `sigma(x')`
/// and separation `y` is symmetric, squares to the identity and preserves
/// norms.
pub fn reflection_is_orthogonal_involution(cases: u32) -> SuiteResult {
    let strat = (1usize..=4).prop_flat_map(|d| {
        (
            Just(d),
            prop::collection::vec(-0.4f64..0.4, d * d),
            prop::collection::vec(-1.0f64..1.0, d),
            prop::collection::vec(-10.0f64..10.0, d),
        )
    });
    finish(runner(cases).run(&strat, |(d, perturb, y, w)| {
        // diagonally dominant, hence nonsingular
        let sigma = DMatrix::identity(d, d) * (0.5 * d as f64 + 1.0) + DMatrix::from_vec(d, d, perturb);
        let mut y = DVector::from_vec(y);
        if y.norm() < 1e-3 {
            y[0] += 0.5;
        }
        let u = reflection_direction(&sigma, &y).ok_or_else(|| TestCaseError::fail("singular"))?;
        prop_assert!((u.norm() - 1.0).abs() < 1e-12);
        let h = reflection_matrix(&u);
        let eye = DMatrix::<f64>::identity(d, d);
        prop_assert!((&h * &h - &eye).abs().max() < 1e-12);
        prop_assert!((&h - h.transpose()).abs().max() < 1e-15);
        let w = DVector::from_vec(w);
        prop_assert!(((&h * &w).norm() - w.norm()).abs() <= 1e-12 * (1.0 + w.norm()));
        // H maps u to -u
        prop_assert!((&h * &u + &u).norm() < 1e-12);
        Ok(())
    }))
}

#[derive(Debug, Clone)]
struct PoissonData {
    sigma0: f64,
    sigma_amp: f64,
    drift: f64,
    alpha0: f64,
    alpha_amp: f64,
    f0: f64,
    f2: f64,
    freq: f64,
    g_lo: f64,
    g_hi: f64,
    policy: f64,
}

fn poisson_data() -> impl Strategy<Value = PoissonData> {
    (
        (0.5f64..2.0, 0.0f64..0.4, -1.0f64..1.0, 0.2f64..3.0, 0.0f64..0.9),
        (0.0f64..5.0, 0.0f64..2.0, 0.1f64..3.0, 0.0f64..10.0, 0.0f64..10.0, -1.0f64..1.0),
    )
        .prop_map(|((sigma0, sigma_amp, drift, alpha0, alpha_amp), (f0, f2, freq, g_lo, g_hi, policy))| PoissonData {
            sigma0,
            sigma_amp,
            drift,
            alpha0,
            alpha_amp,
            f0,
            f2,
            freq,
            g_lo,
            g_hi,
            policy,
        })
}

/// Nonnegative-data problem on `(-2, 2)`: `sigma = s0 (1 + a sin(k x))`,
/// `mu = drift * p`, `alpha = alpha0 (1 + b cos(k x))`, `f = f0 + f2 x^2`.
fn poisson_problem(d: &PoissonData) -> ControlProblem {
    let PoissonData {
        sigma0,
        sigma_amp,
        drift,
        alpha0,
        alpha_amp,
        f0,
        f2,
        freq,
        ..
    } = d.clone();
    ControlProblem::builder()
        .sigma(move |x, _| sigma0 * (1.0 + sigma_amp * (freq * x).sin()))
        .mu(move |_, p| drift * p)
        .alpha(move |x, _| alpha0 * (1.0 + alpha_amp * (freq * x).cos()))
        .f(move |x, _| f0 + f2 * x * x)
        .actions(ActionSet::new(-1.0, 1.0).unwrap())
        .domain(-2.0, 2.0)
        .boundary(d.g_lo, d.g_hi)
        .epsilon0(alpha0 * (1.0 - alpha_amp))
        .lambda((sigma0 * (1.0 - sigma_amp)).powi(2))
        .build()
        .unwrap()
}

/// With `f >= 0` and `g >= 0` the discrete payoff is nonnegative, obeys
/// `sup|v| <= sup|f| / epsilon0 + max|g|`, and repeated solves agree
/// bitwise.
pub fn discrete_maximum_principle(cases: u32) -> SuiteResult {
    finish(runner(cases).run(&poisson_data(), |d| {
        let prob = poisson_problem(&d);
        let grid = Grid::for_problem(&prob, 401).unwrap();
        let pol = Policy::constant(grid.clone(), d.policy, prob.actions()).unwrap();
        let vf = solve_poisson(&prob, &pol, &grid).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let min = vf.v.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(min >= -1e-10, "min v = {}", min);
        let sup_f = d.f0 + 4.0 * d.f2;
        let bound = sup_f / prob.epsilon0() + d.g_lo.max(d.g_hi) + 1e-6;
        prop_assert!(vf.sup_norm() <= bound, "sup v = {} > {}", vf.sup_norm(), bound);
        let again = solve_poisson(&prob, &pol, &grid).unwrap();
        prop_assert!(vf.v.iter().zip(&again.v).all(|(a, b)| a.to_bits() == b.to_bits()));
        Ok(())
    }))
}

/// On the reference problem, for value functions of random constant
/// policies and a random positive scaling `S(x)`, grid search on the scaled
/// operand picks the closed-form action up to the action-grid spacing.
pub fn argmin_scaling_invariance(cases: u32) -> SuiteResult {
    let prob = reference_problem();
    let grid = Grid::for_problem(&prob, 401).unwrap();
    let n_actions = 2001;
    let spacing = 2.0 / (n_actions - 1) as f64;
    let strat = (-1.0f64..1.0, 0.2f64..5.0, 0.0f64..0.9, 0.1f64..3.0, 0.0f64..6.3);
    finish(runner(cases).run(&strat, |(p0, c, amp, k, phase)| {
        let pol = Policy::constant(grid.clone(), p0, prob.actions()).unwrap();
        let vf = solve_poisson(&prob, &pol, &grid).unwrap();
        let s = ScalingFunction::custom(
            move |x, _| c * (1.0 + amp * (k * x + phase).sin()),
            0.5 * c * (1.0 - amp),
            2.0 * c * (1.0 + amp),
        )
        .unwrap();
        let closed = improve_policy(&prob, &s, &vf, ArgminRule::ClosedForm, Execution::Parallel).unwrap();
        let searched =
            improve_policy(&prob, &s, &vf, ArgminRule::GridSearch { n_actions }, Execution::Parallel).unwrap();
        let gap = closed.sup_distance(&searched);
        prop_assert!(gap <= spacing + 1e-12, "gap {} > spacing {}", gap, spacing);
        for &p in closed.values() {
            prop_assert!((-1.0..=1.0).contains(&p));
        }
        Ok(())
    }))
}

/// Payoff and coupling estimates are bitwise reproducible for a fixed seed
/// and identical across execution modes.
pub fn determinism_under_seed(cases: u32) -> SuiteResult {
    let prob = reference_problem();
    let grid = Grid::for_problem(&prob, 201).unwrap();
    let pol = Policy::new(
        grid.clone(),
        grid.nodes().iter().map(|&x| (-x / 2.0).clamp(-1.0, 1.0)).collect(),
        prob.actions(),
    )
    .unwrap();
    let brownian = MarkovDiffusion::brownian(2).unwrap();
    let strat = (any::<u64>(), -9.0f64..9.0, 0.05f64..0.5);
    finish(runner(cases).run(&strat, |(seed, x0, y0)| {
        let cfg = SimConfig {
            dt: 1e-2,
            t_max: 2.0,
            n_paths: 24,
            seed,
        };
        let a = estimate_payoff(&prob, &pol, x0, &cfg, Execution::Sequential).unwrap();
        let b = estimate_payoff(&prob, &pol, x0, &cfg, Execution::Parallel).unwrap();
        let c = estimate_payoff(&prob, &pol, x0, &cfg, Execution::Parallel).unwrap();
        prop_assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        prop_assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        prop_assert_eq!(b, c);

        let params = CouplingParams {
            phi: 1.0,
            delta_c: CouplingParams::default_delta_c(y0),
            dt: 1e-3,
            t_max: 1.0,
            refine: None,
        };
        let x = DVector::from_vec(vec![0.0, 0.0]);
        let xp = DVector::from_vec(vec![y0, 0.0]);
        let e1 = estimate_coupling_probability(&brownian, &x, &xp, &params, 16, seed, Execution::Sequential).unwrap();
        let e2 = estimate_coupling_probability(&brownian, &x, &xp, &params, 16, seed, Execution::Parallel).unwrap();
        prop_assert_eq!(e1, e2);
        Ok(())
    }))
}

/// Any violation found on a coarse sampling grid is found again on the
/// refinement that halves the x spacing.
pub fn assumption_check_refinement(cases: u32) -> SuiteResult {
    let strat = (0.3f64..1.5, 0.0f64..0.8, 0.1f64..2.0, 0.3f64..1.5, 3usize..40);
    finish(runner(cases).run(&strat, |(a0, amp, k, s0, n)| {
        let prob = ControlProblem::builder()
            .sigma(move |x, p| s0 + 0.2 * (k * x).cos() + 0.1 * p)
            .alpha(move |x, _| a0 + amp * (k * x).sin())
            .actions(ActionSet::new(-1.0, 1.0).unwrap())
            .domain(-3.0, 3.0)
            .epsilon0(1.0)
            .lambda(0.5)
            .build()
            .unwrap();
        let coarse = check_assumption1(&prob, n, 5).unwrap();
        let fine = check_assumption1(&prob, 2 * n - 1, 5).unwrap();
        for v in &coarse.violations {
            prop_assert!(fine.violations.contains(v), "{:?} missing after refinement", v);
        }
        prop_assert!(fine.violations.len() >= coarse.violations.len());
        prop_assert!(!fine.passed || coarse.passed);
        Ok(())
    }))
}

/// Example-class problems have `sigma` independent of `p` and constant
/// `alpha`.
pub fn example_class_structure(cases: u32) -> SuiteResult {
    let strat = (0.5f64..2.0, 0.0f64..0.5, -0.5f64..0.5, 0.5f64..2.0, 2.0f64..6.0);
    finish(runner(cases).run(&strat, |(s0, s1, mu2, a, alpha0)| {
        let spec = ExampleClassSpec {
            sigma1: Arc::new(move |x: f64| s0 + s1 * x.sin()),
            mu1: Arc::new(|x: f64| 0.1 * x.cos()),
            f1: Arc::new(|x: f64| x.sin().powi(2)),
            f2: Arc::new(|p: f64| p * p),
            f2_prime: Arc::new(|p: f64| 2.0 * p),
            f2_prime_inv: None,
            mu2,
            alpha0,
            a_action: a,
            lambda: (s0 - s1).max(0.01).powi(2),
            constants: ExampleClassConstants {
                c_mu1_prime: 0.1,
                c_f1_prime: 1.0,
                c_f2_prime: 2.0 * a,
                c_f1: 1.0,
                c_f2: a * a,
                c_mu1: 0.1,
                l_f2: 2.0,
            },
        };
        let (prob, _) = build_example_class(&spec, -5.0, 5.0, 0.0, 0.0).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for i in 0..25 {
            let x = -5.0 + 10.0 * i as f64 / 24.0;
            let s = prob.sigma(x, -a);
            for j in 0..9 {
                let p = -a + 2.0 * a * j as f64 / 8.0;
                prop_assert_eq!(prob.sigma(x, p), s);
                prop_assert_eq!(prob.alpha(x, p), alpha0);
            }
        }
        Ok(())
    }))
}

/// gPIA iterates never increase the payoff beyond the tolerance on random
/// problems of the reference shape.
pub fn monotone_improvement(cases: u32) -> SuiteResult {
    // p0 is taken from the searched action grid, so the search always
    // contains the current action
    let actions = ActionSet::new(-1.0, 1.0).unwrap().linspace(101);
    let strat = (0.6f64..1.5, 0.2f64..1.0, 0.5f64..3.0, 0.0f64..2.0, 0usize..101);
    finish(runner(cases).run(&strat, |(sigma, drift, alpha, cost, k)| {
        let p0 = actions[k];
        let prob = ControlProblem::builder()
            .sigma_const(sigma)
            .mu(move |_, p| drift * p)
            .alpha_const(alpha)
            .f(move |x, p| cost * x * x + p * p)
            .actions(ActionSet::new(-1.0, 1.0).unwrap())
            .domain(-3.0, 3.0)
            .boundary(cost * 9.0, cost * 9.0)
            .epsilon0(alpha)
            .lambda(sigma * sigma)
            .build()
            .unwrap();
        let grid = Grid::for_problem(&prob, 301).unwrap();
        let pol = Policy::constant(grid, p0, prob.actions()).unwrap();
        let cfg = GpiaConfig {
            max_iters: 8,
            ..GpiaConfig::default()
        };
        let rep = run_gpia(
            &prob,
            &ScalingFunction::unit(),
            &pol,
            ArgminRule::GridSearch { n_actions: 101 },
            &cfg,
            Execution::Parallel,
        )
        .unwrap();
        for pair in rep.value_history.windows(2) {
            for (new, old) in pair[1].iter().zip(&pair[0]) {
                prop_assert!(*new <= old + 10.0 * cfg.tol_v, "{} > {}", new, old);
            }
        }
        Ok(())
    }))
}
