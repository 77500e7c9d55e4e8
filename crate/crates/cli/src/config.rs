//! TOML experiment configuration. Unknown keys are rejected; every section
//! is optional and falls back to the defaults documented in the README.

use std::path::PathBuf;
use std::sync::Arc;

use gpia_core::expr::Expr;
use gpia_core::model::{
    self, assemble_example_class, ActionSet, Coefficient, ControlProblem, ExampleClassConstants, ExampleClassSpec,
    ScalarFn,
};
use gpia_core::pia::{ArgminRule, GpiaConfig, ScalingFunction};
use gpia_core::{Execution, Grid, Policy};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub execution: ExecutionKey,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub pia: PiaConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub coupling: CouplingConfig,
    #[serde(default)]
    pub check: CheckConfig,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecutionKey {
    Sequential,
    #[default]
    Parallel,
}

impl From<ExecutionKey> for Execution {
    fn from(k: ExecutionKey) -> Self {
        match k {
            ExecutionKey::Sequential => Execution::Sequential,
            ExecutionKey::Parallel => Execution::Parallel,
        }
    }
}

/// A coefficient given as a number, an expression string, or a
/// piecewise-linear table in `x`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Number(f64),
    Expr(String),
    Table { x: Vec<f64>, y: Vec<f64> },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub builtin: Option<String>,
    pub sigma: Option<CoefficientSpec>,
    pub mu: Option<CoefficientSpec>,
    pub alpha: Option<CoefficientSpec>,
    pub f: Option<CoefficientSpec>,
    pub actions: Option<[f64; 2]>,
    pub domain: Option<[f64; 2]>,
    pub boundary: Option<[f64; 2]>,
    pub epsilon0: Option<f64>,
    pub lambda: Option<f64>,
    pub example_class: Option<ExampleClassConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleClassConfig {
    pub sigma1: CoefficientSpec,
    pub mu1: CoefficientSpec,
    pub f1: CoefficientSpec,
    pub f2: CoefficientSpec,
    pub f2_prime: CoefficientSpec,
    pub mu2: f64,
    pub alpha0: f64,
    pub a: f64,
    pub lambda: f64,
    pub constants: ConstantsConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub c_mu1_prime: f64,
    pub c_f1_prime: f64,
    pub c_f2_prime: f64,
    pub c_f1: f64,
    pub c_f2: f64,
    pub c_mu1: f64,
    pub l_f2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: gpia_core::pde::DEFAULT_NODES,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingKey {
    Unit,
    InverseSigmaSquared,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArgminKey {
    ClosedForm,
    GridSearch,
    GoldenSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PiaConfig {
    pub scaling: ScalingKey,
    pub argmin: Option<ArgminKey>,
    pub n_actions: usize,
    pub golden_tol: f64,
    pub max_iters: usize,
    pub tol_v: f64,
    pub tol_pi: f64,
    pub initial_policy: Option<CoefficientSpec>,
}

impl Default for PiaConfig {
    fn default() -> Self {
        let g = GpiaConfig::default();
        Self {
            scaling: ScalingKey::InverseSigmaSquared,
            argmin: None,
            n_actions: 201,
            golden_tol: 1e-10,
            max_iters: g.max_iters,
            tol_v: g.tol_v,
            tol_pi: g.tol_pi,
            initial_policy: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub dt: f64,
    pub t_max: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 25.0,
            n_paths: 100_000,
            seed: 1,
            x0: vec![-5.0, 0.0, 5.0],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingConfig {
    pub d: usize,
    /// Scalar multiplier `s` of `sigma(X) = s(X_1) I`.
    pub sigma: CoefficientSpec,
    pub lambda: Option<f64>,
    pub phi: f64,
    pub distances: Vec<f64>,
    pub delta_c: Option<f64>,
    pub dt: f64,
    pub t_max: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub refine: Option<f64>,
    pub eps: f64,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            d: 1,
            sigma: CoefficientSpec::Number(1.0),
            lambda: None,
            phi: 1.0,
            distances: vec![0.1],
            delta_c: None,
            dt: 1e-4,
            t_max: 10.0,
            n_paths: 100_000,
            seed: 1,
            refine: None,
            eps: 0.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub n_x: usize,
    pub n_p: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            n_x: model::DEFAULT_CHECK_NX,
            n_p: model::DEFAULT_CHECK_NP,
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    /// Replaces both configured seeds.
    pub fn override_seed(&mut self, seed: u64) {
        self.mc.seed = seed;
        self.coupling.seed = seed;
    }
}

/// Coefficient in `(x, p)`. Tables depend on `x` only.
pub fn coefficient(spec: &CoefficientSpec, name: &str) -> Result<Coefficient, CliError> {
    match spec {
        CoefficientSpec::Number(v) => {
            let v = *v;
            Ok(Arc::new(move |_, _| v))
        }
        CoefficientSpec::Expr(s) => {
            let e = Expr::parse(s).map_err(|e| cfg_err(format!("{name}: {e}")))?;
            Ok(Arc::new(move |x, p| e.eval(x, p)))
        }
        CoefficientSpec::Table { x, y } => {
            let t = table(x, y, name)?;
            Ok(Arc::new(move |x, _| t(x)))
        }
    }
}

/// Function of one variable, written in terms of `var` (`x` or `p`).
fn scalar(spec: &CoefficientSpec, name: &str, var: char) -> Result<ScalarFn, CliError> {
    match spec {
        CoefficientSpec::Number(v) => {
            let v = *v;
            Ok(Arc::new(move |_| v))
        }
        CoefficientSpec::Expr(s) => {
            let e = Expr::parse(s).map_err(|e| cfg_err(format!("{name}: {e}")))?;
            let wrong = if var == 'x' { e.uses_p() } else { e.uses_x() };
            if wrong {
                return Err(cfg_err(format!("{name} must be an expression in `{var}` only")));
            }
            Ok(if var == 'x' {
                Arc::new(move |x| e.eval(x, 0.0))
            } else {
                Arc::new(move |p| e.eval(0.0, p))
            })
        }
        CoefficientSpec::Table { x, y } => {
            let t = table(x, y, name)?;
            Ok(Arc::new(t))
        }
    }
}

/// Piecewise-linear interpolation through strictly increasing knots,
/// constant beyond the ends.
fn table(xs: &[f64], ys: &[f64], name: &str) -> Result<impl Fn(f64) -> f64 + Send + Sync + 'static, CliError> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(cfg_err(format!("{name}: table needs at least two points and equal x/y lengths")));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) || xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(cfg_err(format!("{name}: table x values must be finite and strictly increasing")));
    }
    let (xs, ys) = (xs.to_vec(), ys.to_vec());
    Ok(move |x: f64| {
        let n = xs.len();
        if x <= xs[0] {
            return ys[0];
        }
        if x >= xs[n - 1] {
            return ys[n - 1];
        }
        let i = xs.partition_point(|&k| k <= x) - 1;
        let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        ys[i] + t * (ys[i + 1] - ys[i])
    })
}

fn constant_of(spec: &CoefficientSpec) -> Option<f64> {
    match spec {
        CoefficientSpec::Number(v) => Some(*v),
        CoefficientSpec::Expr(s) => Expr::parse(s).ok().and_then(|e| e.as_constant()),
        CoefficientSpec::Table { .. } => None,
    }
}

pub struct LoadedProblem {
    pub problem: ControlProblem,
    pub example_spec: Option<ExampleClassSpec>,
}

impl ProblemConfig {
    pub fn load(&self) -> Result<LoadedProblem, CliError> {
        let inline = [
            self.sigma.is_some(),
            self.mu.is_some(),
            self.alpha.is_some(),
            self.f.is_some(),
            self.actions.is_some(),
            self.epsilon0.is_some(),
            self.lambda.is_some(),
        ]
        .iter()
        .any(|&b| b);
        if let Some(name) = &self.builtin {
            if inline || self.example_class.is_some() || self.domain.is_some() || self.boundary.is_some() {
                return Err(cfg_err("problem.builtin cannot be combined with other problem keys"));
            }
            let (problem, spec) = model::builtin(name).map_err(|e| cfg_err(e.to_string()))?;
            return Ok(LoadedProblem {
                problem,
                example_spec: spec,
            });
        }
        let [a, b] = self.domain.ok_or_else(|| cfg_err("problem.domain is required"))?;
        let [g_lo, g_hi] = self.boundary.unwrap_or([0.0, 0.0]);
        if let Some(ec) = &self.example_class {
            if inline {
                return Err(cfg_err(
                    "problem.example_class replaces sigma, mu, alpha, f, actions, epsilon0 and lambda",
                ));
            }
            let spec = ExampleClassSpec {
                sigma1: scalar(&ec.sigma1, "example_class.sigma1", 'x')?,
                mu1: scalar(&ec.mu1, "example_class.mu1", 'x')?,
                f1: scalar(&ec.f1, "example_class.f1", 'x')?,
                f2: scalar(&ec.f2, "example_class.f2", 'p')?,
                f2_prime: scalar(&ec.f2_prime, "example_class.f2_prime", 'p')?,
                f2_prime_inv: None,
                mu2: ec.mu2,
                alpha0: ec.alpha0,
                a_action: ec.a,
                lambda: ec.lambda,
                constants: ExampleClassConstants {
                    c_mu1_prime: ec.constants.c_mu1_prime,
                    c_f1_prime: ec.constants.c_f1_prime,
                    c_f2_prime: ec.constants.c_f2_prime,
                    c_f1: ec.constants.c_f1,
                    c_f2: ec.constants.c_f2,
                    c_mu1: ec.constants.c_mu1,
                    l_f2: ec.constants.l_f2,
                },
            };
            let problem = assemble_example_class(&spec, a, b, g_lo, g_hi).map_err(|e| cfg_err(e.to_string()))?;
            return Ok(LoadedProblem {
                problem,
                example_spec: Some(spec),
            });
        }
        let [lo, hi] = self.actions.ok_or_else(|| cfg_err("problem.actions is required"))?;
        let actions = ActionSet::new(lo, hi).map_err(|e| cfg_err(e.to_string()))?;
        let mut builder = ControlProblem::builder().actions(actions).domain(a, b).boundary(g_lo, g_hi);
        for (name, spec) in [("sigma", &self.sigma), ("mu", &self.mu), ("alpha", &self.alpha), ("f", &self.f)] {
            let Some(spec) = spec else { continue };
            let name = format!("problem.{name}");
            builder = match (name.as_str(), constant_of(spec)) {
                ("problem.sigma", Some(c)) => builder.sigma_const(c),
                ("problem.mu", Some(c)) => builder.mu_const(c),
                ("problem.alpha", Some(c)) => builder.alpha_const(c),
                ("problem.f", Some(c)) => builder.f_const(c),
                ("problem.sigma", None) => builder.sigma_arc(coefficient(spec, &name)?),
                ("problem.mu", None) => builder.mu_arc(coefficient(spec, &name)?),
                ("problem.alpha", None) => builder.alpha_arc(coefficient(spec, &name)?),
                _ => builder.f_arc(coefficient(spec, &name)?),
            };
        }
        if let Some(e) = self.epsilon0 {
            builder = builder.epsilon0(e);
        }
        if let Some(l) = self.lambda {
            builder = builder.lambda(l);
        }
        let problem = builder.build().map_err(|e| cfg_err(e.to_string()))?;
        Ok(LoadedProblem {
            problem,
            example_spec: None,
        })
    }
}

pub struct PiaSetup {
    pub scaling: ScalingFunction,
    pub rule: ArgminRule,
    pub config: GpiaConfig,
    pub initial_policy: Policy,
}

impl PiaConfig {
    /// The argmin rule defaults to the closed form for example-class
    /// problems and to grid search otherwise.
    pub fn setup(&self, problem: &ControlProblem, grid: &Grid) -> Result<PiaSetup, CliError> {
        let scaling = match self.scaling {
            ScalingKey::Unit => ScalingFunction::unit(),
            ScalingKey::InverseSigmaSquared => {
                ScalingFunction::inverse_sigma_squared_sampled(problem).map_err(|e| cfg_err(e.to_string()))?
            }
        };
        let argmin = self.argmin.unwrap_or(if problem.example_class().is_some() {
            ArgminKey::ClosedForm
        } else {
            ArgminKey::GridSearch
        });
        let rule = match argmin {
            ArgminKey::ClosedForm => ArgminRule::ClosedForm,
            ArgminKey::GridSearch => ArgminRule::GridSearch {
                n_actions: self.n_actions,
            },
            ArgminKey::GoldenSection => ArgminRule::GoldenSection {
                tolerance: self.golden_tol,
            },
        };
        rule.validate().map_err(|e| cfg_err(e.to_string()))?;
        if matches!(rule, ArgminRule::ClosedForm) && problem.example_class().is_none() {
            return Err(cfg_err("pia.argmin = \"closed-form\" needs an example-class problem"));
        }
        let actions = problem.actions();
        let init = match &self.initial_policy {
            None => vec![actions.hi(); grid.len()],
            Some(spec) => {
                let c = coefficient(spec, "pia.initial_policy")?;
                grid.nodes().iter().map(|&x| c(x, 0.0)).collect()
            }
        };
        if init.iter().any(|p| !actions.contains(*p)) {
            return Err(cfg_err(format!(
                "pia.initial_policy leaves the action set [{}, {}]",
                actions.lo(),
                actions.hi()
            )));
        }
        let initial_policy = Policy::new(grid.clone(), init, actions).map_err(|e| cfg_err(e.to_string()))?;
        Ok(PiaSetup {
            scaling,
            rule,
            config: GpiaConfig {
                max_iters: self.max_iters,
                tol_v: self.tol_v,
                tol_pi: self.tol_pi,
                keep_history: true,
            },
            initial_policy,
        })
    }
}

impl CouplingConfig {
    /// `(scale, lambda)`; `lambda` defaults to `s^2` for a constant scale.
    pub fn scale(&self) -> Result<(Coefficient, f64), CliError> {
        let s = coefficient(&self.sigma, "coupling.sigma")?;
        let lambda = match (self.lambda, constant_of(&self.sigma)) {
            (Some(l), _) => l,
            (None, Some(c)) => c * c,
            (None, None) => return Err(cfg_err("coupling.lambda is required for a non-constant sigma")),
        };
        Ok((s, lambda))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_sections() {
        let c = ExperimentConfig::parse("[problem]\nbuiltin = \"reference\"\n").unwrap();
        assert_eq!(c.grid.n, 2001);
        assert_eq!(c.mc.x0, vec![-5.0, 0.0, 5.0]);
        assert_eq!(c.pia.max_iters, 50);
        let p = c.problem.load().unwrap();
        assert!(p.example_spec.is_some());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::parse("[problem]\nbuiltin = \"reference\"\ncolour = 1\n").is_err());
        assert!(ExperimentConfig::parse("[problem]\nbuiltin = \"reference\"\n[mc]\nsteps = 3\n").is_err());
    }

    #[test]
    fn inline_problem_with_table_and_expressions() {
        let c = ExperimentConfig::parse(
            r#"
[problem]
sigma = { x = [-1.0, 1.0], y = [1.0, 2.0] }
mu = "p"
alpha = 2
f = "x^2 + p^2"
actions = [-1.0, 1.0]
domain = [-1.0, 1.0]
boundary = [0.5, 0.5]
"#,
        )
        .unwrap();
        let p = c.problem.load().unwrap().problem;
        assert_eq!(p.sigma(0.0, 0.3), 1.5);
        assert_eq!(p.sigma(5.0, 0.3), 2.0);
        assert_eq!(p.mu(0.2, -0.5), -0.5);
        assert_eq!(p.alpha(0.0, 0.0), 2.0);
        assert_eq!(p.f(0.5, 0.5), 0.5);
        assert_eq!(p.g_lo(), 0.5);
    }

    #[test]
    fn example_class_from_config_matches_builtin() {
        let c = ExperimentConfig::parse(
            r#"
[problem]
domain = [-10.0, 10.0]
boundary = [100.0, 100.0]
[problem.example_class]
sigma1 = 1
mu1 = 0
f1 = "x^2"
f2 = "p^2"
f2_prime = "2*p"
mu2 = 1
alpha0 = 1
a = 1
lambda = 1
constants = { c_mu1_prime = 0, c_f1_prime = 20, c_f2_prime = 2, c_f1 = 100, c_f2 = 1, c_mu1 = 0, l_f2 = 2 }
"#,
        )
        .unwrap();
        let p = c.problem.load().unwrap().problem;
        let r = model::reference_problem();
        for x in [-3.0, 0.0, 2.5] {
            assert_eq!(p.f(x, 0.4), r.f(x, 0.4));
            assert_eq!(p.mu(x, 0.4), r.mu(x, 0.4));
        }
        let inv = &p.example_class().unwrap().f2_prime_inv;
        assert!((inv(1.0) - 0.5).abs() < 1e-12);
        assert_eq!(inv(5.0), 1.0);
    }

    #[test]
    fn wrong_variable_in_example_class() {
        let Err(err) = scalar(&CoefficientSpec::Expr("x + p".into()), "f2", 'p') else {
            panic!("mixed-variable expression accepted");
        };
        assert!(err.to_string().contains("only"));
    }

    #[test]
    fn builtin_is_exclusive() {
        let c = ExperimentConfig::parse("[problem]\nbuiltin = \"reference\"\nmu = \"p\"\n").unwrap();
        assert!(c.problem.load().is_err());
    }

    #[test]
    fn bad_tables() {
        assert!(table(&[0.0], &[1.0], "t").is_err());
        assert!(table(&[0.0, 0.0], &[1.0, 2.0], "t").is_err());
        assert!(table(&[0.0, 1.0], &[1.0], "t").is_err());
        let t = table(&[0.0, 1.0, 3.0], &[0.0, 2.0, 0.0], "t").unwrap();
        assert_eq!(t(0.5), 1.0);
        assert_eq!(t(2.0), 1.0);
        assert_eq!(t(-1.0), 0.0);
    }

    #[test]
    fn shipped_configs_parse() {
        for text in [
            include_str!("../../../configs/reference.toml"),
            include_str!("../../../configs/coupling.toml"),
            include_str!("../../../configs/wavy.toml"),
        ] {
            let c = ExperimentConfig::parse(text).unwrap();
            c.coupling.scale().unwrap();
        }
        for text in [
            include_str!("../../../configs/reference.toml"),
            include_str!("../../../configs/wavy.toml"),
        ] {
            ExperimentConfig::parse(text).unwrap().problem.load().unwrap();
        }
    }
}
