//! Control-problem data, the structured example class, and sampling checks
//! for the standing assumptions on the coefficients.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Coefficient `(x, p) -> value`.
pub type Coefficient = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Scalar function of one variable.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default sampling resolution for [`check_assumption1`].
pub const DEFAULT_CHECK_NX: usize = 1001;
pub const DEFAULT_CHECK_NP: usize = 101;

/// Compact action interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionSet {
    lo: f64,
    hi: f64,
}

impl ActionSet {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::arg(format!("action set needs finite lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// The symmetric interval `[-a, a]`.
    pub fn symmetric(a: f64) -> Result<Self> {
        Self::new(-a, a)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn clamp(&self, p: f64) -> f64 {
        p.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, p: f64) -> bool {
        (self.lo..=self.hi).contains(&p)
    }

    /// `n >= 2` equally spaced actions from `lo` to `hi` inclusive.
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        linspace(self.lo, self.hi, n)
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + i as f64 * step })
        .collect()
}

/// Extra structure carried by problems assembled from the example class.
#[derive(Clone)]
pub struct ExampleClassData {
    pub mu2: f64,
    /// Inverse of `f2'`, already clamped to the action set.
    pub f2_prime_inv: ScalarFn,
}

impl fmt::Debug for ExampleClassData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExampleClassData").field("mu2", &self.mu2).finish_non_exhaustive()
    }
}

/// Stored coefficient. Constants skip the indirect call in hot loops.
#[derive(Clone)]
enum Coef {
    Const(f64),
    Fn(Coefficient),
}

impl Coef {
    #[inline]
    fn eval(&self, x: f64, p: f64) -> f64 {
        match self {
            Coef::Const(c) => *c,
            Coef::Fn(g) => g(x, p),
        }
    }
}

/// Discounted control problem for a diffusion on `(a, b)` stopped at the
/// first exit, with Dirichlet boundary reward `g`.
#[derive(Clone)]
pub struct ControlProblem {
    sigma: Coef,
    mu: Coef,
    alpha: Coef,
    f: Coef,
    actions: ActionSet,
    domain: (f64, f64),
    g: (f64, f64),
    epsilon0: f64,
    lambda: f64,
    example_class: Option<ExampleClassData>,
}

impl fmt::Debug for ControlProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlProblem")
            .field("actions", &self.actions)
            .field("domain", &self.domain)
            .field("g", &self.g)
            .field("epsilon0", &self.epsilon0)
            .field("lambda", &self.lambda)
            .field("example_class", &self.example_class)
            .finish_non_exhaustive()
    }
}

impl ControlProblem {
    pub fn builder() -> ProblemBuilder {
        ProblemBuilder::default()
    }

    #[inline]
    pub fn sigma(&self, x: f64, p: f64) -> f64 {
        self.sigma.eval(x, p)
    }

    #[inline]
    pub fn mu(&self, x: f64, p: f64) -> f64 {
        self.mu.eval(x, p)
    }

    #[inline]
    pub fn alpha(&self, x: f64, p: f64) -> f64 {
        self.alpha.eval(x, p)
    }

    #[inline]
    pub fn f(&self, x: f64, p: f64) -> f64 {
        self.f.eval(x, p)
    }

    pub fn actions(&self) -> ActionSet {
        self.actions
    }

    pub fn domain_lo(&self) -> f64 {
        self.domain.0
    }

    pub fn domain_hi(&self) -> f64 {
        self.domain.1
    }

    pub fn g_lo(&self) -> f64 {
        self.g.0
    }

    pub fn g_hi(&self) -> f64 {
        self.g.1
    }

    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn example_class(&self) -> Option<&ExampleClassData> {
        self.example_class.as_ref()
    }

    /// Copy of the problem with a different diffusion coefficient. Drops the
    /// example-class marker only if `keep_class` is false.
    pub fn with_sigma(&self, sigma: Coefficient, lambda: f64, keep_class: bool) -> Self {
        let mut out = self.clone();
        out.sigma = Coef::Fn(sigma);
        out.lambda = lambda;
        if !keep_class {
            out.example_class = None;
        }
        out
    }
}

/// Builder for [`ControlProblem`]. Coefficients default to `sigma = 1`,
/// `mu = 0`, `alpha = 1`, `f = 0`; the domain and action set are required.
#[derive(Default)]
pub struct ProblemBuilder {
    sigma: Option<Coef>,
    mu: Option<Coef>,
    alpha: Option<Coef>,
    f: Option<Coef>,
    actions: Option<ActionSet>,
    domain: Option<(f64, f64)>,
    g: (f64, f64),
    epsilon0: Option<f64>,
    lambda: Option<f64>,
    example_class: Option<ExampleClassData>,
}

impl ProblemBuilder {
    pub fn sigma(mut self, c: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.sigma = Some(Coef::Fn(Arc::new(c)));
        self
    }

    pub fn mu(mut self, c: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.mu = Some(Coef::Fn(Arc::new(c)));
        self
    }

    pub fn alpha(mut self, c: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.alpha = Some(Coef::Fn(Arc::new(c)));
        self
    }

    pub fn f(mut self, c: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.f = Some(Coef::Fn(Arc::new(c)));
        self
    }

    pub fn sigma_arc(mut self, c: Coefficient) -> Self {
        self.sigma = Some(Coef::Fn(c));
        self
    }

    pub fn mu_arc(mut self, c: Coefficient) -> Self {
        self.mu = Some(Coef::Fn(c));
        self
    }

    pub fn alpha_arc(mut self, c: Coefficient) -> Self {
        self.alpha = Some(Coef::Fn(c));
        self
    }

    pub fn f_arc(mut self, c: Coefficient) -> Self {
        self.f = Some(Coef::Fn(c));
        self
    }

    pub fn sigma_const(mut self, c: f64) -> Self {
        self.sigma = Some(Coef::Const(c));
        self
    }

    pub fn mu_const(mut self, c: f64) -> Self {
        self.mu = Some(Coef::Const(c));
        self
    }

    pub fn alpha_const(mut self, c: f64) -> Self {
        self.alpha = Some(Coef::Const(c));
        self
    }

    pub fn f_const(mut self, c: f64) -> Self {
        self.f = Some(Coef::Const(c));
        self
    }

    pub fn actions(mut self, actions: ActionSet) -> Self {
        self.actions = Some(actions);
        self
    }

    pub fn domain(mut self, a: f64, b: f64) -> Self {
        self.domain = Some((a, b));
        self
    }

    pub fn boundary(mut self, g_lo: f64, g_hi: f64) -> Self {
        self.g = (g_lo, g_hi);
        self
    }

    pub fn epsilon0(mut self, e: f64) -> Self {
        self.epsilon0 = Some(e);
        self
    }

    pub fn lambda(mut self, l: f64) -> Self {
        self.lambda = Some(l);
        self
    }

    fn example_class(mut self, data: ExampleClassData) -> Self {
        self.example_class = Some(data);
        self
    }

    pub fn build(self) -> Result<ControlProblem> {
        let (a, b) = self.domain.ok_or_else(|| Error::arg("problem domain not set"))?;
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::arg("infinite domains are not supported; truncate to a finite interval"));
        }
        if a >= b {
            return Err(Error::arg(format!("domain needs a < b, got ({a}, {b})")));
        }
        let actions = self.actions.ok_or_else(|| Error::arg("action set not set"))?;
        if !(self.g.0.is_finite() && self.g.1.is_finite()) {
            return Err(Error::arg("boundary reward must be finite"));
        }
        let epsilon0 = self.epsilon0.unwrap_or(1.0);
        let lambda = self.lambda.unwrap_or(1.0);
        if !(epsilon0 > 0.0 && epsilon0.is_finite()) {
            return Err(Error::arg(format!("epsilon0 must be positive, got {epsilon0}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::arg(format!("lambda must be positive, got {lambda}")));
        }
        Ok(ControlProblem {
            sigma: self.sigma.unwrap_or(Coef::Const(1.0)),
            mu: self.mu.unwrap_or(Coef::Const(0.0)),
            alpha: self.alpha.unwrap_or(Coef::Const(1.0)),
            f: self.f.unwrap_or(Coef::Const(0.0)),
            actions,
            domain: (a, b),
            g: self.g,
            epsilon0,
            lambda,
            example_class: self.example_class,
        })
    }
}

// ---------------------------------------------------------------------------
// Assumption checking

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LipschitzEstimate {
    pub in_x: f64,
    pub in_p: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoefficientLipschitz {
    pub sigma: LipschitzEstimate,
    pub mu: LipschitzEstimate,
    pub alpha: LipschitzEstimate,
    pub f: LipschitzEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub x: f64,
    pub p: f64,
    pub description: String,
}

/// Outcome of a sampling check. A pass means no sample refuted the
/// assumption; it is not a proof that the assumption holds.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub passed: bool,
    pub estimated_lipschitz: CoefficientLipschitz,
    pub estimated_lambda: f64,
    pub estimated_epsilon0: f64,
    pub violations: Vec<Violation>,
}

/// Samples the coefficients on an `n_x` by `n_p` grid over `[a, b] x A`,
/// estimates Lipschitz constants by the largest divided difference between
/// adjacent nodes, and records every sample with `alpha < epsilon0`,
/// `sigma^2 < lambda`, or a non-finite coefficient value.
pub fn check_assumption1(problem: &ControlProblem, n_x: usize, n_p: usize) -> Result<AssumptionReport> {
    if n_x < 2 || n_p < 2 {
        return Err(Error::arg(format!("sampling grid must be at least 2 x 2, got {n_x} x {n_p}")));
    }
    let xs = linspace(problem.domain_lo(), problem.domain_hi(), n_x);
    let ps = problem.actions().linspace(n_p);

    let mut samples: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(n_x * n_p));
    let mut violations = Vec::new();
    let mut est_lambda = f64::INFINITY;
    let mut est_eps = f64::INFINITY;

    for &x in &xs {
        for &p in &ps {
            let s = problem.sigma(x, p);
            let m = problem.mu(x, p);
            let al = problem.alpha(x, p);
            let fv = problem.f(x, p);
            for (name, v) in [("sigma", s), ("mu", m), ("alpha", al), ("f", fv)] {
                if !v.is_finite() {
                    violations.push(Violation {
                        x,
                        p,
                        description: format!("{name} is not finite ({v})"),
                    });
                }
            }
            if al < problem.epsilon0() {
                violations.push(Violation {
                    x,
                    p,
                    description: format!("alpha = {al} < epsilon0 = {}", problem.epsilon0()),
                });
            }
            if s * s < problem.lambda() {
                violations.push(Violation {
                    x,
                    p,
                    description: format!("sigma^2 = {} < lambda = {}", s * s, problem.lambda()),
                });
            }
            est_lambda = est_lambda.min(s * s);
            est_eps = est_eps.min(al);
            samples[0].push(s);
            samples[1].push(m);
            samples[2].push(al);
            samples[3].push(fv);
        }
    }

    let hx = xs[1] - xs[0];
    let hp = ps[1] - ps[0];
    let lip = |vals: &[f64]| {
        let at = |i: usize, j: usize| vals[i * n_p + j];
        let mut est = LipschitzEstimate::default();
        for i in 0..n_x {
            for j in 0..n_p {
                if i + 1 < n_x {
                    est.in_x = est.in_x.max((at(i + 1, j) - at(i, j)).abs() / hx);
                }
                if j + 1 < n_p {
                    est.in_p = est.in_p.max((at(i, j + 1) - at(i, j)).abs() / hp);
                }
            }
        }
        est
    };
    let estimated_lipschitz = CoefficientLipschitz {
        sigma: lip(&samples[0]),
        mu: lip(&samples[1]),
        alpha: lip(&samples[2]),
        f: lip(&samples[3]),
    };

    Ok(AssumptionReport {
        passed: violations.is_empty(),
        estimated_lipschitz,
        estimated_lambda: est_lambda,
        estimated_epsilon0: est_eps,
        violations,
    })
}

// ---------------------------------------------------------------------------
// Example class: sigma = sigma1(x), mu = mu1(x) + p mu2, f = f1(x) + f2(p),
// alpha = alpha0, A = [-a, a].

/// Supplied sup-norm bounds for the example class. They are trusted inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleClassConstants {
    pub c_mu1_prime: f64,
    pub c_f1_prime: f64,
    pub c_f2_prime: f64,
    pub c_f1: f64,
    pub c_f2: f64,
    pub c_mu1: f64,
    /// `inf_p f2''(p)`.
    pub l_f2: f64,
}

#[derive(Clone)]
pub struct ExampleClassSpec {
    pub sigma1: ScalarFn,
    pub mu1: ScalarFn,
    pub f1: ScalarFn,
    /// Convex and symmetric.
    pub f2: ScalarFn,
    pub f2_prime: ScalarFn,
    /// Optional closed-form inverse of `f2'`. When absent the inverse is
    /// computed by bisection on `[-a, a]`.
    pub f2_prime_inv: Option<ScalarFn>,
    pub mu2: f64,
    pub alpha0: f64,
    pub a_action: f64,
    /// Lower bound on `sigma1^2`.
    pub lambda: f64,
    pub constants: ExampleClassConstants,
}

impl fmt::Debug for ExampleClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExampleClassSpec")
            .field("mu2", &self.mu2)
            .field("alpha0", &self.alpha0)
            .field("a_action", &self.a_action)
            .field("lambda", &self.lambda)
            .field("constants", &self.constants)
            .finish_non_exhaustive()
    }
}

/// Global derivative bounds `B1`, `B2` and the status of the two sufficient
/// conditions on the example-class data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataClassCertificate {
    pub b1: f64,
    pub b2: f64,
    /// `alpha0 > C'_mu1 + |mu2| (2 + C'_f1 / C'_f2)`.
    pub alpha_condition: bool,
    /// `|mu2| B2 < L_f2`.
    pub derivative_condition: bool,
    pub passed: bool,
}

/// Computes `B1`, `B2` and both inequalities from the supplied constants.
pub fn data_class_certificate(spec: &ExampleClassSpec) -> Result<DataClassCertificate> {
    let c = &spec.constants;
    let mu2 = spec.mu2.abs();
    let threshold = c.c_mu1_prime + mu2;
    if spec.alpha0 <= threshold {
        return Err(Error::DivisionGuard {
            alpha0: spec.alpha0,
            threshold,
        });
    }
    let b1 = (c.c_f1_prime + c.c_f2_prime) / (spec.alpha0 - c.c_mu1_prime - mu2);
    let b2 = (2.0 * (c.c_f1 + c.c_f2) + (c.c_mu1 + spec.a_action * mu2) * b1) / spec.lambda;
    let alpha_condition = spec.alpha0 > c.c_mu1_prime + mu2 * (2.0 + c.c_f1_prime / c.c_f2_prime);
    let derivative_condition = mu2 * b2 < c.l_f2;
    Ok(DataClassCertificate {
        b1,
        b2,
        alpha_condition,
        derivative_condition,
        passed: alpha_condition && derivative_condition,
    })
}

fn validate_example_spec(spec: &ExampleClassSpec) -> Result<()> {
    let c = &spec.constants;
    let all = [
        spec.mu2,
        spec.alpha0,
        spec.a_action,
        spec.lambda,
        c.c_mu1_prime,
        c.c_f1_prime,
        c.c_f2_prime,
        c.c_f1,
        c.c_f2,
        c.c_mu1,
        c.l_f2,
    ];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::arg("example-class constants must be finite"));
    }
    for (name, v) in [
        ("alpha0", spec.alpha0),
        ("a_action", spec.a_action),
        ("lambda", spec.lambda),
        ("C'_f2", c.c_f2_prime),
    ] {
        if v <= 0.0 {
            return Err(Error::arg(format!("{name} must be positive, got {v}")));
        }
    }
    for (name, v) in [
        ("C'_mu1", c.c_mu1_prime),
        ("C'_f1", c.c_f1_prime),
        ("C_f1", c.c_f1),
        ("C_f2", c.c_f2),
        ("C_mu1", c.c_mu1),
        ("L_f2", c.l_f2),
    ] {
        if v < 0.0 {
            return Err(Error::arg(format!("{name} must be nonnegative, got {v}")));
        }
    }

    let a = spec.a_action;
    let fa = (spec.f2_prime)(a);
    if (fa - c.c_f2_prime).abs() > 1e-9 * fa.abs().max(1.0) {
        return Err(Error::arg(format!("C'_f2 must equal f2'(a) = {fa}, got {}", c.c_f2_prime)));
    }
    let ps = linspace(-a, a, 201);
    let scale = ps.iter().map(|&p| (spec.f2)(p).abs()).fold(1.0, f64::max);
    for &p in &ps {
        if ((spec.f2)(p) - (spec.f2)(-p)).abs() > 1e-12 * scale {
            return Err(Error::arg(format!("f2 is not symmetric at p = {p}")));
        }
    }
    for w in ps.windows(2) {
        if (spec.f2_prime)(w[1]) < (spec.f2_prime)(w[0]) {
            return Err(Error::arg(format!("f2' decreases between {} and {}; f2 is not convex", w[0], w[1])));
        }
    }
    Ok(())
}

/// Assembles the example-class problem without computing the certificate.
pub fn assemble_example_class(
    spec: &ExampleClassSpec,
    domain_lo: f64,
    domain_hi: f64,
    g_lo: f64,
    g_hi: f64,
) -> Result<ControlProblem> {
    validate_example_spec(spec)?;
    let actions = ActionSet::symmetric(spec.a_action)?;
    let (sigma1, mu1, f1, f2) = (
        spec.sigma1.clone(),
        spec.mu1.clone(),
        spec.f1.clone(),
        spec.f2.clone(),
    );
    let (mu2, alpha0) = (spec.mu2, spec.alpha0);
    let f2_prime_inv: ScalarFn = match &spec.f2_prime_inv {
        Some(inv) => {
            let inv = inv.clone();
            Arc::new(move |y| actions.clamp(inv(y)))
        }
        None => {
            let fp = spec.f2_prime.clone();
            Arc::new(move |y| invert_monotone(&*fp, y, actions.lo(), actions.hi()))
        }
    };
    ControlProblem::builder()
        .sigma(move |x, _| sigma1(x))
        .mu(move |x, p| mu1(x) + p * mu2)
        .alpha_const(alpha0)
        .f(move |x, p| f1(x) + f2(p))
        .actions(actions)
        .domain(domain_lo, domain_hi)
        .boundary(g_lo, g_hi)
        .epsilon0(alpha0)
        .lambda(spec.lambda)
        .example_class(ExampleClassData { mu2, f2_prime_inv })
        .build()
}

/// Assembles the example-class problem and its certificate. Fails with
/// [`Error::DivisionGuard`] when `B1` is undefined.
pub fn build_example_class(
    spec: &ExampleClassSpec,
    domain_lo: f64,
    domain_hi: f64,
    g_lo: f64,
    g_hi: f64,
) -> Result<(ControlProblem, DataClassCertificate)> {
    validate_example_spec(spec)?;
    let cert = data_class_certificate(spec)?;
    let problem = assemble_example_class(spec, domain_lo, domain_hi, g_lo, g_hi)?;
    Ok((problem, cert))
}

/// Solves `g(p) = y` for nondecreasing `g` on `[lo, hi]`, saturating at the
/// ends.
fn invert_monotone(g: &dyn Fn(f64) -> f64, y: f64, lo: f64, hi: f64) -> f64 {
    if y <= g(lo) {
        return lo;
    }
    if y >= g(hi) {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m) < y {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

// ---------------------------------------------------------------------------
// Built-in problems

pub const BUILTIN_NAMES: &[&str] = &["reference"];

/// Example-class data of the reference problem: `sigma = 1`, `mu = p`,
/// `alpha = 1`, `f = x^2 + p^2`, `A = [-1, 1]`, with bounds valid on
/// `[-10, 10]`.
pub fn reference_example_spec() -> ExampleClassSpec {
    ExampleClassSpec {
        sigma1: Arc::new(|_| 1.0),
        mu1: Arc::new(|_| 0.0),
        f1: Arc::new(|x| x * x),
        f2: Arc::new(|p| p * p),
        f2_prime: Arc::new(|p| 2.0 * p),
        f2_prime_inv: Some(Arc::new(|y| 0.5 * y)),
        mu2: 1.0,
        alpha0: 1.0,
        a_action: 1.0,
        lambda: 1.0,
        constants: ExampleClassConstants {
            c_mu1_prime: 0.0,
            c_f1_prime: 20.0,
            c_f2_prime: 2.0,
            c_f1: 100.0,
            c_f2: 1.0,
            c_mu1: 0.0,
            l_f2: 2.0,
        },
    }
}

/// The reference problem on `(-10, 10)` with `g(x) = x^2` at both ends.
///
/// Equal to `assemble_example_class(&reference_example_spec(), ..)`, with the
/// coefficients written out so that simulation loops avoid nested calls.
pub fn reference_problem() -> ControlProblem {
    let spec = reference_example_spec();
    validate_example_spec(&spec).expect("reference data is valid");
    let actions = ActionSet::symmetric(spec.a_action).expect("reference data is valid");
    ControlProblem::builder()
        .sigma_const(1.0)
        .mu(|_, p| p)
        .alpha_const(1.0)
        .f(|x, p| x * x + p * p)
        .actions(actions)
        .domain(-10.0, 10.0)
        .boundary(100.0, 100.0)
        .epsilon0(spec.alpha0)
        .lambda(spec.lambda)
        .example_class(ExampleClassData {
            mu2: spec.mu2,
            f2_prime_inv: Arc::new(move |y| actions.clamp(0.5 * y)),
        })
        .build()
        .expect("reference data is valid")
}

/// Looks up a built-in problem by name.
pub fn builtin(name: &str) -> Result<(ControlProblem, Option<ExampleClassSpec>)> {
    match name {
        "reference" => Ok((reference_problem(), Some(reference_example_spec()))),
        other => Err(Error::arg(format!(
            "unknown builtin problem `{other}` (available: {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}
