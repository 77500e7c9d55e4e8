//! Euler–Maruyama estimation of the payoff of a Markov policy.
//!
//! A path runs until it leaves `(a, b)` or reaches the horizon `t_max`.
//! Over each step the coefficients are frozen at the left end, so the
//! discount factor is multiplied by `exp(-alpha dt)` and the running cost
//! contributes `discount * f * (1 - exp(-alpha dt)) / alpha`, the exact
//! integral of the frozen discount over the step (`discount * f * dt` to
//! first order). On the first step that leaves the interval the state is
//! clamped to the crossed end and the discounted boundary reward is added;
//! no Brownian-bridge correction is applied. Paths that never exit are
//! truncated at `t_max` with no terminal term, which biases the payoff by at
//! most `sup|f| / epsilon0 * exp(-epsilon0 t_max)`.
//!
//! The normal increment of step `k` on path `i` is drawn from the
//! counter-based stream keyed by `(seed, i, k)`, and the estimator sums path
//! payoffs in path-index order, so estimates are bitwise reproducible under
//! any parallel schedule.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::ControlProblem;
use crate::pde::Policy;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_max > 0.0 && self.dt <= self.t_max && self.t_max.is_finite()) {
            return Err(Error::arg(format!(
                "need 0 < dt <= t_max, got dt = {}, t_max = {}",
                self.dt, self.t_max
            )));
        }
        if self.n_paths < 1 {
            return Err(Error::arg("n_paths must be at least 1"));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> u64 {
        ((self.t_max / self.dt).round() as u64).max(1)
    }

    /// Bound on the bias from truncating at `t_max`.
    pub fn truncation_bias_bound(&self, sup_f: f64, epsilon0: f64) -> f64 {
        sup_f / epsilon0 * (-epsilon0 * self.t_max).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitSide {
    Lo,
    Hi,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPayoff {
    pub payoff: f64,
    pub exited: bool,
    pub exit_side: ExitSide,
    /// Exit time, or `t_max` when the path did not exit.
    pub exit_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    /// Fraction of paths that left the interval before `t_max`.
    pub exit_fraction: f64,
}

fn check_start(problem: &ControlProblem, x0: f64) -> Result<()> {
    if !(x0 > problem.domain_lo() && x0 < problem.domain_hi()) {
        return Err(Error::arg(format!(
            "x0 = {x0} is not inside ({}, {})",
            problem.domain_lo(),
            problem.domain_hi()
        )));
    }
    Ok(())
}

const UNSET: PathPayoff = PathPayoff {
    payoff: f64::NAN,
    exited: false,
    exit_side: ExitSide::None,
    exit_time: f64::NAN,
};

/// Simulates one controlled path from `x0`.
pub fn simulate_path(
    problem: &ControlProblem,
    policy: &Policy,
    x0: f64,
    cfg: &SimConfig,
    path_index: u64,
) -> Result<PathPayoff> {
    cfg.validate()?;
    check_start(problem, x0)?;
    let mut out = [UNSET];
    run_paths(problem, policy, x0, cfg, path_index, &mut out);
    Ok(out[0])
}

/// Paths advanced together in lockstep. Paths are independent, so
/// interleaving them lets consecutive steps of different paths overlap;
/// each path still sees exactly the operations of a lone run.
const LANES: usize = 4;

fn run_paths(problem: &ControlProblem, policy: &Policy, x0: f64, cfg: &SimConfig, first: u64, out: &mut [PathPayoff]) {
    debug_assert!(out.len() <= LANES);
    let (a, b) = (problem.domain_lo(), problem.domain_hi());
    let dt = cfg.dt;
    let sqrt_dt = dt.sqrt();
    let n_steps = cfg.n_steps();

    // Live paths occupy slots 0..n; an exiting path is swap-removed. Each
    // coefficient is evaluated over all slots in its own loop so that the
    // indirect calls do not interleave with the state updates.
    let mut n = out.len();
    let mut id = [0usize; LANES];
    let mut stream = [rng::Stream::new(cfg.seed, first); LANES];
    let mut x = [x0; LANES];
    let mut discount = [1.0; LANES];
    let mut payoff = [0.0; LANES];
    // exp(-alpha dt) and the step weight, cached while alpha is unchanged
    let mut last_alpha = [f64::NAN; LANES];
    let mut decay = [1.0; LANES];
    let mut weight = [dt; LANES];
    let (mut p, mut al, mut fv, mut mu, mut sg) = ([0.0; LANES], [0.0; LANES], [0.0; LANES], [0.0; LANES], [0.0; LANES]);
    for j in 0..n {
        id[j] = j;
        stream[j] = rng::Stream::new(cfg.seed, first + j as u64);
    }

    for k in 0..n_steps {
        for m in 0..n {
            p[m] = policy.eval(x[m]);
        }
        for m in 0..n {
            al[m] = problem.alpha(x[m], p[m]);
        }
        for m in 0..n {
            fv[m] = problem.f(x[m], p[m]);
        }
        for m in 0..n {
            mu[m] = problem.mu(x[m], p[m]);
        }
        for m in 0..n {
            sg[m] = problem.sigma(x[m], p[m]);
        }
        let mut m = 0;
        while m < n {
            if al[m] != last_alpha[m] {
                last_alpha[m] = al[m];
                decay[m] = (-al[m] * dt).exp();
                weight[m] = if al[m].abs() * dt > 1e-300 { -(-al[m] * dt).exp_m1() / al[m] } else { dt };
            }
            payoff[m] += discount[m] * fv[m] * weight[m];
            discount[m] *= decay[m];
            let xi = stream[m].normal(k);
            x[m] += mu[m] * dt + sg[m] * sqrt_dt * xi;

            let side = if x[m] <= a {
                ExitSide::Lo
            } else if x[m] >= b {
                ExitSide::Hi
            } else {
                m += 1;
                continue;
            };
            let g = if side == ExitSide::Lo { problem.g_lo() } else { problem.g_hi() };
            out[id[m]] = PathPayoff {
                payoff: payoff[m] + discount[m] * g,
                exited: true,
                exit_side: side,
                exit_time: (k + 1) as f64 * dt,
            };
            n -= 1;
            id[m] = id[n];
            stream[m] = stream[n];
            x[m] = x[n];
            discount[m] = discount[n];
            payoff[m] = payoff[n];
            last_alpha[m] = last_alpha[n];
            decay[m] = decay[n];
            weight[m] = weight[n];
            al[m] = al[n];
            fv[m] = fv[n];
            mu[m] = mu[n];
            sg[m] = sg[n];
        }
        if n == 0 {
            return;
        }
    }
    for m in 0..n {
        out[id[m]] = PathPayoff {
            payoff: payoff[m],
            exited: false,
            exit_side: ExitSide::None,
            exit_time: cfg.t_max,
        };
    }
}

/// Mean and standard error of the payoff over `cfg.n_paths` paths
/// `0..n_paths`. Paths run under `exec`; the reduction is in path order.
pub fn estimate_payoff(
    problem: &ControlProblem,
    policy: &Policy,
    x0: f64,
    cfg: &SimConfig,
    exec: Execution,
) -> Result<MonteCarloEstimate> {
    cfg.validate()?;
    check_start(problem, x0)?;
    let n_blocks = cfg.n_paths.div_ceil(LANES);
    let blocks = exec.map(n_blocks, |blk| {
        let first = blk * LANES;
        let mut out = [UNSET; LANES];
        let len = LANES.min(cfg.n_paths - first);
        run_paths(problem, policy, x0, cfg, first as u64, &mut out[..len]);
        (out, len)
    });
    let paths: Vec<PathPayoff> = blocks.iter().flat_map(|(out, len)| out[..*len].iter().copied()).collect();
    let n = paths.len() as f64;
    let mean = paths.iter().map(|p| p.payoff).sum::<f64>() / n;
    let std_error = if paths.len() > 1 {
        let ss = paths.iter().map(|p| (p.payoff - mean).powi(2)).sum::<f64>();
        (ss / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let exit_fraction = paths.iter().filter(|p| p.exited).count() as f64 / n;
    Ok(MonteCarloEstimate {
        mean,
        std_error,
        n_paths: paths.len(),
        exit_fraction,
    })
}
