//! Generalized policy iteration.
//!
//! Iteration `n` solves the Poisson equation of `pi_n` and chooses
//! `pi_{n+1}(x)` nodewise as a minimizer over the action set of
//!
//! ```text
//! S(x, p) * ( 1/2 sigma(x,p)^2 V_n''(x) + mu(x,p) V_n'(x) - alpha(x,p) V_n(x) + f(x,p) )
//! ```
//!
//! for a strictly positive scaling `S`. With `S = 1 / sigma^2` the
//! second-order term no longer depends on `p` and drops out of the
//! minimization.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{Coefficient, ControlProblem, DEFAULT_CHECK_NP, DEFAULT_CHECK_NX};
use crate::pde::{residual, solve_poisson, sup_diff, Policy, ValueFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingKind {
    Unit,
    InverseSigmaSquared,
    Custom,
}

/// Positive weight `S(x, p)` with claimed bounds `eps_s < S < m_s`. Every
/// evaluation is checked against the bounds.
#[derive(Clone)]
pub struct ScalingFunction {
    s: Coefficient,
    eps_s: f64,
    m_s: f64,
    kind: ScalingKind,
}

impl fmt::Debug for ScalingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalingFunction")
            .field("kind", &self.kind)
            .field("eps_s", &self.eps_s)
            .field("m_s", &self.m_s)
            .finish_non_exhaustive()
    }
}

impl ScalingFunction {
    pub fn custom(
        s: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        eps_s: f64,
        m_s: f64,
    ) -> Result<Self> {
        if !(eps_s > 0.0 && eps_s < m_s && m_s.is_finite()) {
            return Err(Error::arg(format!("scaling bounds need 0 < eps_s < m_s, got ({eps_s}, {m_s})")));
        }
        Ok(Self {
            s: Arc::new(s),
            eps_s,
            m_s,
            kind: ScalingKind::Custom,
        })
    }

    /// `S = 1`.
    pub fn unit() -> Self {
        Self {
            s: Arc::new(|_, _| 1.0),
            eps_s: 0.5,
            m_s: 2.0,
            kind: ScalingKind::Unit,
        }
    }

    /// `S = 1 / sigma^2`, with `sigma_sq_max` an upper bound on `sigma^2`.
    /// The bounds are `1 / (2 sigma_sq_max) < S < 2 / lambda`.
    pub fn inverse_sigma_squared(problem: &ControlProblem, sigma_sq_max: f64) -> Result<Self> {
        if !(sigma_sq_max >= problem.lambda() && sigma_sq_max.is_finite()) {
            return Err(Error::arg(format!(
                "sigma_sq_max = {sigma_sq_max} must be finite and at least lambda = {}",
                problem.lambda()
            )));
        }
        let p = problem.clone();
        Ok(Self {
            s: Arc::new(move |x, a| {
                let s = p.sigma(x, a);
                1.0 / (s * s)
            }),
            eps_s: 0.5 / sigma_sq_max,
            m_s: 2.0 / problem.lambda(),
            kind: ScalingKind::InverseSigmaSquared,
        })
    }

    /// Like [`ScalingFunction::inverse_sigma_squared`] with `sigma_sq_max`
    /// taken as the largest sampled `sigma^2` on the default check grid.
    pub fn inverse_sigma_squared_sampled(problem: &ControlProblem) -> Result<Self> {
        let xs = crate::model::linspace(problem.domain_lo(), problem.domain_hi(), DEFAULT_CHECK_NX);
        let ps = problem.actions().linspace(DEFAULT_CHECK_NP);
        let mut max = problem.lambda();
        for &x in &xs {
            for &p in &ps {
                let s = problem.sigma(x, p);
                max = max.max(s * s);
            }
        }
        Self::inverse_sigma_squared(problem, max)
    }

    pub fn kind(&self) -> ScalingKind {
        self.kind
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.eps_s, self.m_s)
    }

    pub fn eval(&self, x: f64, p: f64) -> Result<f64> {
        let value = (self.s)(x, p);
        if !(value > self.eps_s && value < self.m_s) {
            return Err(Error::ScalingBound {
                x,
                p,
                value,
                eps_s: self.eps_s,
                m_s: self.m_s,
            });
        }
        Ok(value)
    }
}

/// How the nodewise minimization over the action set is carried out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArgminRule {
    /// `clamp((f2')^{-1}(-mu2 V'), lo, hi)`; needs an example-class problem
    /// and a scaling that does not depend on `p`.
    ClosedForm,
    /// Exhaustive search over `n_actions` equally spaced actions.
    GridSearch { n_actions: usize },
    /// Golden-section search; assumes the operand is unimodal in `p`.
    GoldenSection { tolerance: f64 },
}

impl ArgminRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ArgminRule::GridSearch { n_actions } if n_actions < 2 => {
                Err(Error::arg(format!("grid search needs at least 2 actions, got {n_actions}")))
            }
            ArgminRule::GoldenSection { tolerance } if !(tolerance > 0.0) => {
                Err(Error::arg(format!("golden-section tolerance must be positive, got {tolerance}")))
            }
            _ => Ok(()),
        }
    }
}

/// `S(x,p) (1/2 sigma^2 v'' + mu v' - alpha v + f)` at node `i`.
pub fn scaled_bellman_operand(
    problem: &ControlProblem,
    scaling: &ScalingFunction,
    vf: &ValueFunction,
    node_index: usize,
    p: f64,
) -> Result<f64> {
    if node_index >= vf.grid.len() {
        return Err(Error::arg(format!(
            "node index {node_index} out of range for {} nodes",
            vf.grid.len()
        )));
    }
    if !problem.actions().contains(p) {
        return Err(Error::arg(format!("action {p} outside the action set")));
    }
    let x = vf.grid.x(node_index);
    let s = scaling.eval(x, p)?;
    Ok(s * unscaled_operand(problem, vf, node_index, p))
}

#[inline]
fn unscaled_operand(problem: &ControlProblem, vf: &ValueFunction, i: usize, p: f64) -> f64 {
    let x = vf.grid.x(i);
    let sig = problem.sigma(x, p);
    0.5 * sig * sig * vf.d2v[i] + problem.mu(x, p) * vf.dv[i] - problem.alpha(x, p) * vf.v[i] + problem.f(x, p)
}

/// `(mu v' - alpha v + f) / sigma^2` at node `i`: the `1/sigma^2`-scaled
/// operand with the `p`-independent term `v''/2` removed. Same minimizers
/// as the full operand under `S = 1/sigma^2`.
pub fn reduced_bellman_operand(problem: &ControlProblem, vf: &ValueFunction, node_index: usize, p: f64) -> f64 {
    let i = node_index;
    let x = vf.grid.x(i);
    let sig = problem.sigma(x, p);
    (problem.mu(x, p) * vf.dv[i] - problem.alpha(x, p) * vf.v[i] + problem.f(x, p)) / (sig * sig)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn argmin_at_node(
    problem: &ControlProblem,
    scaling: &ScalingFunction,
    vf: &ValueFunction,
    rule: ArgminRule,
    i: usize,
) -> Result<f64> {
    let actions = problem.actions();
    let x = vf.grid.x(i);
    let objective = |p: f64| -> Result<f64> { Ok(scaling.eval(x, p)? * unscaled_operand(problem, vf, i, p)) };
    match rule {
        ArgminRule::ClosedForm => {
            let ec = problem.example_class().ok_or(Error::RuleMismatch)?;
            let p = actions.clamp((ec.f2_prime_inv)(-ec.mu2 * vf.dv[i]));
            scaling.eval(x, p)?;
            Ok(p)
        }
        ArgminRule::GridSearch { n_actions } => {
            let step = (actions.hi() - actions.lo()) / (n_actions - 1) as f64;
            let mut best_p = actions.lo();
            let mut best = objective(best_p)?;
            for k in 1..n_actions {
                let p = if k + 1 == n_actions {
                    actions.hi()
                } else {
                    actions.lo() + k as f64 * step
                };
                let v = objective(p)?;
                if v < best {
                    best = v;
                    best_p = p;
                }
            }
            Ok(best_p)
        }
        ArgminRule::GoldenSection { tolerance } => {
            let (mut a, mut b) = (actions.lo(), actions.hi());
            let mut c = b - INV_PHI * (b - a);
            let mut d = a + INV_PHI * (b - a);
            let (mut fc, mut fd) = (objective(c)?, objective(d)?);
            while b - a > tolerance {
                if fc <= fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - INV_PHI * (b - a);
                    fc = objective(c)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + INV_PHI * (b - a);
                    fd = objective(d)?;
                }
            }
            // the bracket may have collapsed onto an end of the action set
            let mid = actions.clamp(0.5 * (a + b));
            let mut best_p = actions.lo();
            let mut best = objective(best_p)?;
            for p in [mid, actions.hi()] {
                let v = objective(p)?;
                if v < best {
                    best = v;
                    best_p = p;
                }
            }
            Ok(best_p)
        }
    }
}

/// Nodewise policy improvement on the grid of `vf`. Nodes are independent
/// and the result does not depend on `exec`.
pub fn improve_policy(
    problem: &ControlProblem,
    scaling: &ScalingFunction,
    vf: &ValueFunction,
    rule: ArgminRule,
    exec: Execution,
) -> Result<Policy> {
    rule.validate()?;
    if matches!(rule, ArgminRule::ClosedForm) && problem.example_class().is_none() {
        return Err(Error::RuleMismatch);
    }
    let p = exec.try_map(vf.grid.len(), |i| argmin_at_node(problem, scaling, vf, rule, i))?;
    Policy::new(vf.grid.clone(), p, problem.actions())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpiaConfig {
    pub max_iters: usize,
    pub tol_v: f64,
    pub tol_pi: f64,
    /// Keep every `V_n` and `pi_n` in the report.
    pub keep_history: bool,
}

impl Default for GpiaConfig {
    fn default() -> Self {
        Self {
            max_iters: 50,
            tol_v: 1e-8,
            tol_pi: 1e-6,
            keep_history: true,
        }
    }
}

impl GpiaConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::arg("max_iters must be at least 1"));
        }
        if !(self.tol_v > 0.0 && self.tol_pi > 0.0) {
            return Err(Error::arg("tolerances must be positive"));
        }
        Ok(())
    }
}

/// Diagnostics of iteration `n`: the solve of `V_n` and the choice of
/// `pi_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub n: usize,
    /// `sup |V_n - V_{n-1}|`; `None` for `n = 0`.
    pub sup_dv: Option<f64>,
    /// `sup |pi_{n+1} - pi_n|`.
    pub sup_dpi: f64,
    /// `max (V_n - V_{n-1})`; `None` for `n = 0`.
    pub max_monotonicity_violation: Option<f64>,
    /// Max-norm of the interior residual of `V_n`.
    pub interior_residual_norm: f64,
    /// Set when `max_monotonicity_violation > 10 tol_v`.
    pub monotonicity_warning: bool,
}

#[derive(Debug, Clone)]
pub struct IterationReport {
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    /// The last improved policy.
    pub final_policy: Policy,
    /// The payoff of the last solved policy.
    pub final_value: ValueFunction,
    /// `V_0, V_1, ...` (empty unless history was requested).
    pub value_history: Vec<Vec<f64>>,
    /// `pi_0, pi_1, ...` (empty unless history was requested).
    pub policy_history: Vec<Vec<f64>>,
}

impl IterationReport {
    /// Number of policy-improvement steps performed.
    pub fn improvement_steps(&self) -> usize {
        self.iterations.len()
    }

    /// Largest recorded `max (V_n - V_{n-1})` over all iterations.
    pub fn max_monotonicity_violation(&self) -> f64 {
        self.iterations
            .iter()
            .filter_map(|r| r.max_monotonicity_violation)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Alternates [`solve_poisson`] and [`improve_policy`] until both
/// `sup |V_n - V_{n-1}| < tol_v` and `sup |pi_{n+1} - pi_n| < tol_pi`, or
/// `max_iters` iterations have run.
pub fn run_gpia(
    problem: &ControlProblem,
    scaling: &ScalingFunction,
    initial_policy: &Policy,
    rule: ArgminRule,
    config: &GpiaConfig,
    exec: Execution,
) -> Result<IterationReport> {
    config.validate()?;
    rule.validate()?;
    let grid = initial_policy.grid().clone();
    let ctx = |iteration: usize| {
        move |e: Error| Error::Iteration {
            iteration,
            source: Box::new(e),
        }
    };

    let mut policy = initial_policy.clone();
    let mut prev: Option<ValueFunction> = None;
    let mut iterations = Vec::new();
    let mut value_history = Vec::new();
    let mut policy_history = Vec::new();
    if config.keep_history {
        policy_history.push(policy.values().to_vec());
    }
    let mut converged = false;

    for n in 0..config.max_iters {
        let vf = solve_poisson(problem, &policy, &grid).map_err(ctx(n))?;
        let res = residual(problem, &policy, &vf).iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let next = improve_policy(problem, scaling, &vf, rule, exec).map_err(ctx(n))?;
        let sup_dpi = next.sup_distance(&policy);
        let (sup_dv, mono) = match &prev {
            Some(pv) => {
                let mono = vf.v.iter().zip(&pv.v).fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b));
                (Some(sup_diff(&vf.v, &pv.v)), Some(mono))
            }
            None => (None, None),
        };
        iterations.push(IterationRecord {
            n,
            sup_dv,
            sup_dpi,
            max_monotonicity_violation: mono,
            interior_residual_norm: res,
            monotonicity_warning: mono.is_some_and(|m| m > 10.0 * config.tol_v),
        });
        if config.keep_history {
            value_history.push(vf.v.clone());
            policy_history.push(next.values().to_vec());
        }
        policy = next;
        let done = sup_dv.is_some_and(|d| d < config.tol_v) && sup_dpi < config.tol_pi;
        prev = Some(vf);
        if done {
            converged = true;
            break;
        }
    }

    Ok(IterationReport {
        iterations,
        converged,
        final_policy: policy,
        final_value: prev.expect("at least one iteration ran"),
        value_history,
        policy_history,
    })
}
