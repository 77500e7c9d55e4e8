//! Finite-difference solver for the Poisson equation of a fixed Markov
//! policy,
//!
//! ```text
//! 1/2 sigma_pi(x)^2 v''(x) + mu_pi(x) v'(x) - alpha_pi(x) v(x) + f_pi(x) = 0,   a < x < b,
//! v(a) = g(a),  v(b) = g(b),
//! ```
//!
//! discretized by central differences on a uniform grid and solved with the
//! Thomas algorithm. Under the mesh-Peclet condition `h |mu| / sigma^2 < 2`
//! and `alpha > 0` the system is a strictly diagonally dominant M-matrix,
//! which gives the discrete maximum principle.

use crate::error::{Error, Result};
use crate::model::{ActionSet, ControlProblem};
use crate::tridiag;

/// Default node count for `[-10, 10]` (h = 0.01).
pub const DEFAULT_NODES: usize = 2001;

/// Uniform mesh on `[a, b]`, boundary nodes included.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    h: f64,
    inv_h: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::arg(format!("grid needs at least 3 nodes, got {n}")));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::arg(format!("grid needs finite a < b, got [{a}, {b}]")));
        }
        let h = (b - a) / (n - 1) as f64;
        Ok(Self {
            a,
            b,
            h,
            inv_h: 1.0 / h,
            nodes: crate::model::linspace(a, b, n),
        })
    }

    /// Grid spanning the problem domain.
    pub fn for_problem(problem: &ControlProblem, n: usize) -> Result<Self> {
        Self::new(problem.domain_lo(), problem.domain_hi(), n)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Index `i` of the cell `[x_i, x_{i+1}]` containing `x` (clamped to the
    /// grid) and the local coordinate in `[0, 1]`.
    #[inline]
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.nodes.len();
        let s = ((x - self.a) * self.inv_h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        (i, s - i as f64)
    }
}

/// Nodal Markov policy, evaluated off-grid by piecewise-linear
/// interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    grid: Grid,
    p: Vec<f64>,
    actions: ActionSet,
}

impl Policy {
    pub fn new(grid: Grid, p: Vec<f64>, actions: ActionSet) -> Result<Self> {
        if p.len() != grid.len() {
            return Err(Error::arg(format!(
                "policy has {} values for a {}-node grid",
                p.len(),
                grid.len()
            )));
        }
        if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !actions.contains(**v)) {
            return Err(Error::arg(format!(
                "policy value {v} at node {i} is outside [{}, {}]",
                actions.lo(),
                actions.hi()
            )));
        }
        Ok(Self { grid, p, actions })
    }

    pub fn constant(grid: Grid, value: f64, actions: ActionSet) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![value; n], actions)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn actions(&self) -> ActionSet {
        self.actions
    }

    #[inline]
    pub fn at_node(&self, i: usize) -> f64 {
        self.p[i]
    }

    /// Linear interpolation between the bracketing nodes; `x` outside
    /// `[a, b]` takes the boundary value.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let (i, t) = self.grid.locate(x);
        let v = self.p[i] + t * (self.p[i + 1] - self.p[i]);
        self.actions.clamp(v)
    }

    /// Sup-norm distance between nodal values.
    pub fn sup_distance(&self, other: &Policy) -> f64 {
        sup_diff(&self.p, &other.p)
    }
}

/// Nodal payoff of a policy together with its stencil derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    pub grid: Grid,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub d2v: Vec<f64>,
}

impl ValueFunction {
    /// Builds the derivative arrays from nodal values: central differences
    /// inside, second-order one-sided stencils at the ends.
    pub fn from_values(grid: Grid, v: Vec<f64>) -> Result<Self> {
        if v.len() != grid.len() {
            return Err(Error::arg(format!("{} values for a {}-node grid", v.len(), grid.len())));
        }
        let (dv, d2v) = derivatives(&v, grid.h());
        Ok(Self { grid, v, dv, d2v })
    }

    pub fn sup_norm(&self) -> f64 {
        self.v.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Linear interpolation of `v` at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let (i, t) = self.grid.locate(x);
        self.v[i] + t * (self.v[i + 1] - self.v[i])
    }
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn derivatives(v: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let mut dv = vec![0.0; n];
    let mut d2v = vec![0.0; n];
    let h2 = h * h;
    for i in 1..n - 1 {
        dv[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        d2v[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    }
    dv[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    dv[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    if n >= 4 {
        d2v[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
        d2v[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    } else {
        // three nodes: only the first-order stencil fits
        d2v[0] = d2v[1];
        d2v[2] = d2v[1];
    }
    (dv, d2v)
}

fn check_shapes(problem: &ControlProblem, policy: &Policy, grid: &Grid) -> Result<()> {
    if policy.grid() != grid {
        return Err(Error::arg("policy is defined on a different grid"));
    }
    let tol = 1e-12 * (grid.b() - grid.a());
    if (problem.domain_lo() - grid.a()).abs() > tol || (problem.domain_hi() - grid.b()).abs() > tol {
        return Err(Error::arg(format!(
            "grid [{}, {}] does not match problem domain [{}, {}]",
            grid.a(),
            grid.b(),
            problem.domain_lo(),
            problem.domain_hi()
        )));
    }
    Ok(())
}

/// Solves the policy Poisson equation on `grid` with Dirichlet data from
/// the problem.
pub fn solve_poisson(problem: &ControlProblem, policy: &Policy, grid: &Grid) -> Result<ValueFunction> {
    check_shapes(problem, policy, grid)?;
    let n = grid.len();
    let m = n - 2;
    let h = grid.h();
    let h2 = h * h;

    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];

    for k in 0..m {
        let i = k + 1;
        let x = grid.x(i);
        let p = policy.at_node(i);
        let s2 = {
            let s = problem.sigma(x, p);
            s * s
        };
        let mu = problem.mu(x, p);
        let al = problem.alpha(x, p);
        let fv = problem.f(x, p);

        let peclet = h * mu.abs() / s2;
        if !(peclet < 2.0) {
            return Err(Error::PecletViolation { node: i, x, peclet });
        }
        let lo = 0.5 * s2 / h2 - 0.5 * mu / h;
        let up = 0.5 * s2 / h2 + 0.5 * mu / h;
        let d = -s2 / h2 - al;
        if !(d.abs() > lo.abs() + up.abs()) {
            return Err(Error::NotDiagonallyDominant { node: i, x });
        }
        lower[k] = lo;
        diag[k] = d;
        upper[k] = up;
        rhs[k] = -fv;
    }
    rhs[0] -= lower[0] * problem.g_lo();
    rhs[m - 1] -= upper[m - 1] * problem.g_hi();

    let interior = tridiag::solve(&lower, &diag, &upper, &rhs);
    let mut v = Vec::with_capacity(n);
    v.push(problem.g_lo());
    v.extend_from_slice(&interior);
    v.push(problem.g_hi());
    ValueFunction::from_values(grid.clone(), v)
}

/// Discrete residual `1/2 sigma^2 d2v + mu dv - alpha v + f` at the interior
/// nodes (length `n - 2`).
pub fn residual(problem: &ControlProblem, policy: &Policy, vf: &ValueFunction) -> Vec<f64> {
    let n = vf.grid.len();
    (1..n - 1)
        .map(|i| {
            let x = vf.grid.x(i);
            let p = policy.at_node(i);
            let s = problem.sigma(x, p);
            0.5 * s * s * vf.d2v[i] + problem.mu(x, p) * vf.dv[i] - problem.alpha(x, p) * vf.v[i]
                + problem.f(x, p)
        })
        .collect()
}
