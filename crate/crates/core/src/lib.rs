//! Generalized policy iteration for discounted control of one-dimensional
//! diffusions on a bounded interval.
//!
//! Each iteration solves the linear Poisson equation of the current Markov
//! policy by central finite differences and a tridiagonal solve ([`pde`]),
//! then improves the policy nodewise by minimizing a positively scaled
//! Bellman operand ([`pia`]). Two simulation harnesses check the
//! probabilistic side of the method: an Euler–Maruyama payoff estimator
//! ([`mc`]) and a reflection (mirror) coupling of two diffusion copies
//! ([`coupling`]).
//!
//! Data-parallel loops (nodewise argmin, Monte-Carlo paths, coupling pairs)
//! go through [`exec::Execution`]; with the `parallel` feature they run on
//! rayon, otherwise sequentially. Both modes produce identical results.

pub mod coupling;
pub mod error;
pub mod exec;
pub mod expr;
pub mod mc;
pub mod model;
pub mod output;
pub mod pde;
pub mod pia;
pub mod rng;
mod tridiag;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{ActionSet, ControlProblem};
pub use pde::{Grid, Policy, ValueFunction};
