mod support;

use std::sync::Arc;

use gpia_core::model::{assemble_example_class, reference_example_spec, reference_problem, ActionSet, ControlProblem};
use gpia_core::pde::{solve_poisson, Grid, Policy};
use gpia_core::pia::{
    improve_policy, reduced_bellman_operand, run_gpia, scaled_bellman_operand, ArgminRule, GpiaConfig,
    ScalingFunction,
};
use gpia_core::Execution;

/// The reference problem with `sigma = 1 + 0.1 sin x`.
fn wavy_sigma_problem() -> ControlProblem {
    let mut spec = reference_example_spec();
    spec.sigma1 = Arc::new(|x: f64| 1.0 + 0.1 * x.sin());
    spec.lambda = 0.81;
    assemble_example_class(&spec, -10.0, 10.0, 100.0, 100.0).unwrap()
}

#[test]
fn reference_run_converges_in_a_few_steps() {
    let (_, rep) = support::reference_run();
    assert!(rep.converged);
    assert!(rep.improvement_steps() <= 6, "{}", rep.improvement_steps());
    let last = rep.iterations.last().unwrap();
    assert!(last.sup_dpi < 1e-6);
    assert!(last.sup_dv.unwrap() < 1e-8);
    assert!(rep.iterations.iter().all(|r| !r.monotonicity_warning));
}

#[test]
fn closed_form_matches_exhaustive_grid_search() {
    let prob = reference_problem();
    let grid = Grid::for_problem(&prob, 2001).unwrap();
    let pol = Policy::constant(grid.clone(), 1.0, prob.actions()).unwrap();
    let vf = solve_poisson(&prob, &pol, &grid).unwrap();
    let s = ScalingFunction::unit();
    let closed = improve_policy(&prob, &s, &vf, ArgminRule::ClosedForm, Execution::Parallel).unwrap();
    let search = improve_policy(&prob, &s, &vf, ArgminRule::GridSearch { n_actions: 2001 }, Execution::Parallel).unwrap();
    assert!(closed.sup_distance(&search) <= 1e-3 + 1e-12);
    for (i, &p) in closed.values().iter().enumerate() {
        let expected = (-vf.dv[i] / 2.0).clamp(-1.0, 1.0);
        assert!((p - expected).abs() < 1e-15, "node {i}");
    }
}

#[test]
fn reduced_operand_has_the_same_minimizer() {
    let prob = reference_problem();
    let grid = Grid::for_problem(&prob, 401).unwrap();
    let pol = Policy::constant(grid.clone(), -0.4, prob.actions()).unwrap();
    let vf = solve_poisson(&prob, &pol, &grid).unwrap();
    let s = ScalingFunction::inverse_sigma_squared_sampled(&prob).unwrap();
    let actions = prob.actions().linspace(801);
    let argmin = |g: &dyn Fn(f64) -> f64| {
        actions.iter().copied().fold((f64::NAN, f64::INFINITY), |b, p| {
            let v = g(p);
            if v < b.1 {
                (p, v)
            } else {
                b
            }
        })
    };
    for i in 1..grid.len() - 1 {
        let full = argmin(&|p| scaled_bellman_operand(&prob, &s, &vf, i, p).unwrap());
        let reduced = argmin(&|p| reduced_bellman_operand(&prob, &vf, i, p));
        assert_eq!(full.0, reduced.0, "node {i}");
        // the two operands differ by the p-independent term v''/2
        let gap = full.1 - reduced.1;
        assert!((gap - 0.5 * vf.d2v[i]).abs() < 1e-9 * (1.0 + vf.d2v[i].abs()), "node {i}");
    }
}

#[test]
fn operand_at_opposite_actions_differs_by_twice_the_drift_term() {
    let prob = reference_problem();
    let grid = Grid::for_problem(&prob, 401).unwrap();
    let pol = Policy::constant(grid.clone(), 1.0, prob.actions()).unwrap();
    let vf = solve_poisson(&prob, &pol, &grid).unwrap();
    let s = ScalingFunction::unit();
    for i in [1, 57, 200, 333, 399] {
        for p in [0.1, 0.5, 1.0] {
            let d = scaled_bellman_operand(&prob, &s, &vf, i, p).unwrap()
                - scaled_bellman_operand(&prob, &s, &vf, i, -p).unwrap();
            assert!((d - 2.0 * p * vf.dv[i]).abs() < 1e-9 * (1.0 + vf.dv[i].abs()));
        }
    }
}

#[test]
fn unit_and_inverse_variance_scaling_agree_when_sigma_is_one() {
    let prob = reference_problem();
    let grid = Grid::for_problem(&prob, 2001).unwrap();
    let pi0 = Policy::constant(grid, 1.0, prob.actions()).unwrap();
    let rule = ArgminRule::GoldenSection { tolerance: 1e-10 };
    let cfg = GpiaConfig::default();
    let a = run_gpia(&prob, &ScalingFunction::unit(), &pi0, rule, &cfg, Execution::Parallel).unwrap();
    let s = ScalingFunction::inverse_sigma_squared_sampled(&prob).unwrap();
    let b = run_gpia(&prob, &s, &pi0, rule, &cfg, Execution::Parallel).unwrap();
    assert!(a.final_policy.sup_distance(&b.final_policy) < 1e-6);
    let dv = a.final_value.v.iter().zip(&b.final_value.v).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(dv < 1e-6, "{dv}");
}

#[test]
fn limit_does_not_depend_on_the_scaling() {
    let prob = wavy_sigma_problem();
    let grid = Grid::for_problem(&prob, 2001).unwrap();
    let pi0 = Policy::constant(grid, 1.0, prob.actions()).unwrap();
    let rule = ArgminRule::GoldenSection { tolerance: 1e-10 };
    let cfg = GpiaConfig::default();
    let a = run_gpia(&prob, &ScalingFunction::unit(), &pi0, rule, &cfg, Execution::Parallel).unwrap();
    let s = ScalingFunction::inverse_sigma_squared_sampled(&prob).unwrap();
    let b = run_gpia(&prob, &s, &pi0, rule, &cfg, Execution::Parallel).unwrap();
    assert!(a.converged && b.converged);
    let dv = a.final_value.v.iter().zip(&b.final_value.v).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(dv < 1e-4, "{dv}");
}

#[test]
fn uncontrolled_problem_stops_after_one_improvement() {
    let prob = ControlProblem::builder()
        .mu(|x, _| -0.2 * x)
        .f(|x, _| x * x)
        .actions(ActionSet::new(-1.0, 1.0).unwrap())
        .domain(-3.0, 3.0)
        .boundary(9.0, 9.0)
        .build()
        .unwrap();
    let grid = Grid::for_problem(&prob, 301).unwrap();
    let pi0 = Policy::constant(grid, 0.3, prob.actions()).unwrap();
    let rep = run_gpia(
        &prob,
        &ScalingFunction::unit(),
        &pi0,
        ArgminRule::GridSearch { n_actions: 11 },
        &GpiaConfig::default(),
        Execution::Parallel,
    )
    .unwrap();
    // a flat operand ties everywhere; ties go to the smallest action
    assert!(rep.policy_history[1].iter().all(|&p| p == -1.0));
    assert_eq!(rep.value_history[0], rep.value_history[1]);
    assert!(rep.converged);
    assert_eq!(rep.improvement_steps(), 2);
    assert_eq!(rep.iterations[1].sup_dv, Some(0.0));
}

#[test]
fn converged_policy_is_a_fixed_point() {
    let (prob, rep) = support::reference_run();
    let cfg = GpiaConfig::default();
    let s = ScalingFunction::inverse_sigma_squared_sampled(&prob).unwrap();
    let grid = rep.final_policy.grid().clone();
    let vf = solve_poisson(&prob, &rep.final_policy, &grid).unwrap();
    let next = improve_policy(&prob, &s, &vf, ArgminRule::ClosedForm, Execution::Parallel).unwrap();
    assert!(next.sup_distance(&rep.final_policy) < cfg.tol_pi);
    let again = solve_poisson(&prob, &next, &grid).unwrap();
    let dv = again.v.iter().zip(&vf.v).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(dv < cfg.tol_v, "{dv}");
}

#[test]
fn policies_saturate_outside_the_central_interval() {
    let (_, rep) = support::reference_run();
    let pol = &rep.final_policy;
    let h = pol.grid().h();
    for (&x, &p) in pol.grid().nodes().iter().zip(pol.values()) {
        if x >= 2.0 + 2.0 * h {
            assert_eq!(p, -1.0, "x = {x}");
        }
        if x <= -2.0 - 2.0 * h {
            assert_eq!(p, 1.0, "x = {x}");
        }
    }
    // every improved iterate agrees with the final one outside (-2, 2)
    for (n, snap) in rep.policy_history.iter().enumerate().skip(1) {
        for (i, &x) in pol.grid().nodes().iter().enumerate() {
            if x.abs() >= 2.0 {
                assert_eq!(snap[i], pol.values()[i], "iterate {n}, x = {x}");
            }
        }
    }
    // the unsaturated region is a symmetric interval inside (-2, 2)
    let extent = support::interior_extent(pol);
    assert!(extent > 1.0 && extent < 2.0, "{extent}");
    for (&x, &p) in pol.grid().nodes().iter().zip(pol.values()) {
        if x.abs() <= 1.5 {
            assert!(p > -1.0 && p < 1.0, "x = {x}");
        }
    }
}

#[test]
fn switch_point_is_stable_under_refinement() {
    let extent = |n| support::interior_extent(&support::reference_run_on(n).1.final_policy);
    let (coarse, fine) = (extent(501), extent(4001));
    // h = 0.04 on the coarse grid
    assert!((coarse - fine).abs() <= 0.04 + 0.005, "{coarse} vs {fine}");
    assert!((fine - 1.57).abs() < 0.01, "{fine}");
}

#[test]
fn history_lengths_follow_the_iteration_count() {
    let prob = reference_problem();
    let grid = Grid::for_problem(&prob, 201).unwrap();
    let pi0 = Policy::constant(grid, 1.0, prob.actions()).unwrap();
    let cfg = GpiaConfig {
        max_iters: 1,
        ..GpiaConfig::default()
    };
    let rep = run_gpia(&prob, &ScalingFunction::unit(), &pi0, ArgminRule::ClosedForm, &cfg, Execution::Parallel).unwrap();
    assert_eq!(rep.value_history.len(), 1);
    assert_eq!(rep.policy_history.len(), 2);
    assert!(!rep.converged);
}

#[test]
fn parallel_and_sequential_improvement_agree_bitwise() {
    let prob = wavy_sigma_problem();
    let grid = Grid::for_problem(&prob, 1001).unwrap();
    let pol = Policy::constant(grid.clone(), 0.5, prob.actions()).unwrap();
    let vf = solve_poisson(&prob, &pol, &grid).unwrap();
    let s = ScalingFunction::inverse_sigma_squared_sampled(&prob).unwrap();
    for rule in [
        ArgminRule::ClosedForm,
        ArgminRule::GridSearch { n_actions: 101 },
        ArgminRule::GoldenSection { tolerance: 1e-9 },
    ] {
        let a = improve_policy(&prob, &s, &vf, rule, Execution::Sequential).unwrap();
        let b = improve_policy(&prob, &s, &vf, rule, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
