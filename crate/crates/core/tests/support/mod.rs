// Each test target uses a different subset of these helpers.
#![allow(dead_code)]

pub mod props;

use gpia_core::model::{reference_problem, ControlProblem};
use gpia_core::pde::{solve_poisson, Grid, Policy, DEFAULT_NODES};
use gpia_core::pia::{run_gpia, ArgminRule, GpiaConfig, IterationReport, ScalingFunction};
use gpia_core::Execution;

/// gPIA on the reference problem from `pi_0 = 1` with `S = 1/sigma^2`,
/// closed-form argmin and default tolerances on the default grid.
pub fn reference_run() -> (ControlProblem, IterationReport) {
    reference_run_on(DEFAULT_NODES)
}

pub fn reference_run_on(nodes: usize) -> (ControlProblem, IterationReport) {
    let prob = reference_problem();
    let grid = Grid::for_problem(&prob, nodes).unwrap();
    let pi0 = Policy::constant(grid, 1.0, prob.actions()).unwrap();
    let scaling = ScalingFunction::inverse_sigma_squared_sampled(&prob).unwrap();
    let rep = run_gpia(
        &prob,
        &scaling,
        &pi0,
        ArgminRule::ClosedForm,
        &GpiaConfig::default(),
        Execution::Parallel,
    )
    .unwrap();
    (prob, rep)
}

/// Max-norm error of the solver on `v = sin x` (`sigma = 1`, `mu = 0`,
/// `alpha = 1`, `f = 1.5 sin x`, exact boundary data) with `n` nodes on
/// `(-10, 10)`.
pub fn manufactured_sine_error(n: usize) -> f64 {
    let (a, b) = (-10.0f64, 10.0f64);
    let prob = ControlProblem::builder()
        .f(|x, _| 1.5 * x.sin())
        .actions(gpia_core::ActionSet::new(-1.0, 1.0).unwrap())
        .domain(a, b)
        .boundary(a.sin(), b.sin())
        .build()
        .unwrap();
    let grid = Grid::for_problem(&prob, n).unwrap();
    let pol = Policy::constant(grid.clone(), 0.0, prob.actions()).unwrap();
    let vf = solve_poisson(&prob, &pol, &grid).unwrap();
    grid.nodes()
        .iter()
        .zip(&vf.v)
        .fold(0.0, |m, (x, v)| f64::max(m, (v - x.sin()).abs()))
}

/// Largest `|x|` at which `p` is strictly inside the action interval.
pub fn interior_extent(policy: &Policy) -> f64 {
    let a = policy.actions();
    policy
        .grid()
        .nodes()
        .iter()
        .zip(policy.values())
        .filter(|(_, p)| **p > a.lo() && **p < a.hi())
        .fold(0.0, |m, (x, _)| f64::max(m, x.abs()))
}
