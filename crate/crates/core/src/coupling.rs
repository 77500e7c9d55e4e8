//! Mirror (reflection) coupling of two copies of a Markov diffusion.
//!
//! Both copies are driven by the same Gaussian increment `dB`; the second
//! copy sees it reflected, `dB' = H dB` with `H = I - 2 u u^T` and
//! `u = sigma(X')^{-1} Y / |sigma(X')^{-1} Y|`, `Y = X - X'`. Coupling is
//! declared once the separation comes within `delta_c` of zero (checked
//! along the straight segment between consecutive separations, so a
//! one-dimensional crossing is not missed), separation once `|Y| >= phi`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng;

pub type MatrixField = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

/// Diffusion `dX = sigma(X) dB + mu(X) dt` in `R^d` under a fixed policy.
#[derive(Clone)]
pub struct MarkovDiffusion {
    d: usize,
    sigma: MatrixField,
    mu: VectorField,
    lambda: f64,
}

impl fmt::Debug for MarkovDiffusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarkovDiffusion")
            .field("d", &self.d)
            .field("lambda", &self.lambda)
            .finish_non_exhaustive()
    }
}

impl MarkovDiffusion {
    pub fn new(d: usize, sigma: MatrixField, mu: VectorField, lambda: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::arg("dimension must be at least 1"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::arg(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self { d, sigma, mu, lambda })
    }

    /// `sigma = I`, `mu = 0`.
    pub fn brownian(d: usize) -> Result<Self> {
        Self::new(
            d,
            Arc::new(move |_| DMatrix::identity(d, d)),
            Arc::new(move |_| DVector::zeros(d)),
            1.0,
        )
    }

    /// `sigma(x) = scale(x) I`, `mu = 0`.
    pub fn isotropic(
        d: usize,
        scale: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        lambda: f64,
    ) -> Result<Self> {
        Self::new(
            d,
            Arc::new(move |x| DMatrix::identity(d, d) * scale(x)),
            Arc::new(move |_| DVector::zeros(d)),
            lambda,
        )
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.sigma)(x)
    }

    pub fn mu(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.mu)(x)
    }

    /// Smallest eigenvalue of `sigma sigma^T` over the sample points; errors
    /// when it falls below `lambda - tol`.
    pub fn check_ellipticity(&self, points: &[DVector<f64>], tol: f64) -> Result<f64> {
        let mut min = f64::INFINITY;
        for x in points {
            let s = self.sigma(x);
            let eig = (&s * s.transpose()).symmetric_eigenvalues();
            let m = eig.iter().copied().fold(f64::INFINITY, f64::min);
            if m < self.lambda - tol {
                return Err(Error::arg(format!(
                    "sigma sigma^T has eigenvalue {m} < lambda = {} at {:?}",
                    self.lambda,
                    x.as_slice()
                )));
            }
            min = min.min(m);
        }
        Ok(min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    pub phi: f64,
    pub delta_c: f64,
    pub dt: f64,
    pub t_max: f64,
    /// When set to `kappa`, step `k` uses `min(dt, kappa |Y_k|^2)` so the
    /// increments stay small relative to the current separation.
    pub refine: Option<f64>,
}

impl CouplingParams {
    /// Default coupling radius: one hundredth of the initial distance.
    pub fn default_delta_c(y0: f64) -> f64 {
        y0 / 100.0
    }

    fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0 && self.phi.is_finite()) {
            return Err(Error::arg(format!("phi must be positive, got {}", self.phi)));
        }
        if !(self.delta_c > 0.0) {
            return Err(Error::arg(format!("delta_c must be positive, got {}", self.delta_c)));
        }
        if !(self.dt > 0.0 && self.t_max >= self.dt && self.t_max.is_finite()) {
            return Err(Error::arg(format!(
                "need 0 < dt <= t_max, got dt = {}, t_max = {}",
                self.dt, self.t_max
            )));
        }
        if let Some(k) = self.refine {
            if !(k > 0.0) {
                return Err(Error::arg(format!("refine factor must be positive, got {k}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingOutcome {
    /// `|Y|` reached `delta_c` first.
    pub coupled: bool,
    /// `|Y|` reached `phi` first.
    pub separated: bool,
    /// Time of the decision, or the horizon.
    pub time: f64,
    pub final_distance: f64,
}

/// Unit vector `sigma(x')^{-1} y / |sigma(x')^{-1} y|`.
pub fn reflection_direction(sigma_xp: &DMatrix<f64>, y: &DVector<f64>) -> Option<DVector<f64>> {
    let z = sigma_xp.clone().lu().solve(y)?;
    let norm = z.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return None;
    }
    Some(z / norm)
}

/// Householder matrix `I - 2 u u^T` for a unit vector `u`.
pub fn reflection_matrix(u: &DVector<f64>) -> DMatrix<f64> {
    let d = u.len();
    DMatrix::identity(d, d) - 2.0 * u * u.transpose()
}

/// Smallest norm on the segment from `a` to `b`.
fn segment_min_norm(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let d = b - a;
    let dd = d.norm_squared();
    if dd == 0.0 {
        return a.norm();
    }
    let t = (-a.dot(&d) / dd).clamp(0.0, 1.0);
    (a + d * t).norm()
}

struct MirrorPair<'a> {
    diff: &'a MarkovDiffusion,
    x: DVector<f64>,
    xp: DVector<f64>,
    dbuf: Vec<f64>,
}

impl<'a> MirrorPair<'a> {
    /// Advances both copies by one step of length `h` using the normals of
    /// cell `(seed, path, k)`.
    fn step(&mut self, h: f64, seed: u64, path: u64, k: u64) -> Result<()> {
        rng::normals(seed, path, k, &mut self.dbuf);
        let sq = h.sqrt();
        let db = DVector::from_iterator(self.dbuf.len(), self.dbuf.iter().map(|z| z * sq));
        let y = &self.x - &self.xp;
        let s_x = self.diff.sigma(&self.x);
        let s_xp = self.diff.sigma(&self.xp);
        let u = reflection_direction(&s_xp, &y).ok_or(Error::SingularDiffusion { step: k })?;
        let db_ref = &db - &u * (2.0 * u.dot(&db));
        let mu_x = self.diff.mu(&self.x);
        let mu_xp = self.diff.mu(&self.xp);
        self.x += s_x * &db + mu_x * h;
        self.xp += s_xp * db_ref + mu_xp * h;
        Ok(())
    }

    /// Synchronous step: both copies see the same increment. Used after
    /// coupling, so that each copy stays an Euler chain of the diffusion.
    fn step_synchronous(&mut self, h: f64, seed: u64, path: u64, k: u64) {
        rng::normals(seed, path, k, &mut self.dbuf);
        let sq = h.sqrt();
        let db = DVector::from_iterator(self.dbuf.len(), self.dbuf.iter().map(|z| z * sq));
        let s_x = self.diff.sigma(&self.x);
        let s_xp = self.diff.sigma(&self.xp);
        let mu_x = self.diff.mu(&self.x);
        let mu_xp = self.diff.mu(&self.xp);
        self.x += s_x * &db + mu_x * h;
        self.xp += s_xp * db + mu_xp * h;
    }
}

fn check_pair(diff: &MarkovDiffusion, x: &DVector<f64>, x_prime: &DVector<f64>) -> Result<f64> {
    if x.len() != diff.dim() || x_prime.len() != diff.dim() {
        return Err(Error::arg(format!(
            "points must have dimension {}, got {} and {}",
            diff.dim(),
            x.len(),
            x_prime.len()
        )));
    }
    let y0 = (x - x_prime).norm();
    if y0 == 0.0 {
        return Err(Error::arg("x and x' must differ"));
    }
    Ok(y0)
}

/// Runs one mirror-coupled pair until coupling, separation or the horizon.
pub fn simulate_mirror_pair(
    diff: &MarkovDiffusion,
    x: &DVector<f64>,
    x_prime: &DVector<f64>,
    params: &CouplingParams,
    seed: u64,
    path_index: u64,
) -> Result<CouplingOutcome> {
    params.validate()?;
    let y0 = check_pair(diff, x, x_prime)?;
    if y0 >= params.phi {
        return Err(Error::arg(format!("initial distance {y0} must be below phi = {}", params.phi)));
    }
    let rel = 1e-12 * params.delta_c;
    if y0 < params.delta_c - rel {
        return Err(Error::arg(format!(
            "initial distance {y0} is below delta_c = {}",
            params.delta_c
        )));
    }
    if y0 <= params.delta_c + rel {
        return Ok(CouplingOutcome {
            coupled: true,
            separated: false,
            time: 0.0,
            final_distance: y0,
        });
    }

    let mut pair = MirrorPair {
        diff,
        x: x.clone(),
        xp: x_prime.clone(),
        dbuf: vec![0.0; diff.dim()],
    };
    let mut t = 0.0;
    let mut k = 0u64;
    let mut y = x - x_prime;
    while t < params.t_max {
        let mut h = params.dt;
        if let Some(kappa) = params.refine {
            h = h.min(kappa * y.norm_squared());
        }
        h = h.min(params.t_max - t).max(f64::MIN_POSITIVE);
        pair.step(h, seed, path_index, k)?;
        t += h;
        k += 1;
        let y_new = &pair.x - &pair.xp;
        let closest = segment_min_norm(&y, &y_new);
        if closest <= params.delta_c {
            return Ok(CouplingOutcome {
                coupled: true,
                separated: false,
                time: t,
                final_distance: closest,
            });
        }
        let dist = y_new.norm();
        if dist >= params.phi {
            return Ok(CouplingOutcome {
                coupled: false,
                separated: true,
                time: t,
                final_distance: dist,
            });
        }
        y = y_new;
    }
    Ok(CouplingOutcome {
        coupled: false,
        separated: false,
        time: params.t_max,
        final_distance: y.norm(),
    })
}

/// Positions of both copies at `horizon`. The copies are mirror coupled
/// until their separation first comes within `delta_c`, then driven
/// synchronously; there is no separation stop. The switch time is a
/// stopping time and both reflected and shared increments are standard
/// normal, so each copy on its own is exactly the Euler chain of the
/// diffusion. Snapping one copy onto the other at coupling would instead
/// shift it by the overshoot of the last step, which is biased in sign.
pub fn coupled_positions(
    diff: &MarkovDiffusion,
    x: &DVector<f64>,
    x_prime: &DVector<f64>,
    delta_c: f64,
    dt: f64,
    horizon: f64,
    seed: u64,
    path_index: u64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_pair(diff, x, x_prime)?;
    let n = ((horizon / dt).round() as u64).max(1);
    let mut pair = MirrorPair {
        diff,
        x: x.clone(),
        xp: x_prime.clone(),
        dbuf: vec![0.0; diff.dim()],
    };
    let mut coupled = false;
    for k in 0..n {
        if coupled {
            pair.step_synchronous(dt, seed, path_index, k);
            continue;
        }
        let y = &pair.x - &pair.xp;
        pair.step(dt, seed, path_index, k)?;
        let y_new = &pair.x - &pair.xp;
        coupled = segment_min_norm(&y, &y_new) <= delta_c;
    }
    Ok((pair.x, pair.xp))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingEstimate {
    /// Fraction of paths that separated before coupling.
    pub p_separated: f64,
    /// Binomial standard error of `p_separated`.
    pub std_error: f64,
    pub p_coupled: f64,
    /// Fraction of paths that hit the horizon undecided.
    pub p_censored: f64,
    pub n_paths: usize,
}

/// Estimates the probability that the pair separates to `phi` before
/// coupling, over paths `0..n_paths`.
pub fn estimate_coupling_probability(
    diff: &MarkovDiffusion,
    x: &DVector<f64>,
    x_prime: &DVector<f64>,
    params: &CouplingParams,
    n_paths: usize,
    seed: u64,
    exec: Execution,
) -> Result<CouplingEstimate> {
    if n_paths < 1 {
        return Err(Error::arg("n_paths must be at least 1"));
    }
    // validate once up front so argument errors are not path-dependent
    simulate_mirror_pair(diff, x, x_prime, &CouplingParams { t_max: params.dt, ..*params }, seed, u64::MAX)?;
    let outcomes = exec.try_map(n_paths, |i| simulate_mirror_pair(diff, x, x_prime, params, seed, i as u64))?;
    let n = n_paths as f64;
    let sep = outcomes.iter().filter(|o| o.separated).count() as f64 / n;
    let coupled = outcomes.iter().filter(|o| o.coupled).count() as f64 / n;
    let censored = outcomes.iter().filter(|o| !o.coupled && !o.separated).count() as f64 / n;
    Ok(CouplingEstimate {
        p_separated: sep,
        std_error: (sep * (1.0 - sep) / n).sqrt(),
        p_coupled: coupled,
        p_censored: censored,
        n_paths,
    })
}

/// Exit-probability bound `s(y0) / s(phi)` for the scale function
/// `s(z) = z^{(1 - eps)/2}`, i.e. `(y0 / phi)^{(1 - eps)/2}`.
/// Requires `0 < y0 <= phi` and `0 <= eps < 1`.
pub fn bessel_bound(y0: f64, phi: f64, eps: f64) -> Result<f64> {
    if !(y0 > 0.0 && y0 <= phi && phi.is_finite()) {
        return Err(Error::arg(format!("need 0 < y0 <= phi, got y0 = {y0}, phi = {phi}")));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::arg(format!("need 0 <= eps < 1, got {eps}")));
    }
    Ok((y0 / phi).powf(0.5 * (1.0 - eps)))
}

/// Radius `min{1, eps sqrt(lambda) / M, eps (1 - eps) lambda / M^2}` below
/// which the scale-function comparison applies, for a local Lipschitz
/// constant `M > 1` of the coefficients.
pub fn comparison_radius(eps: f64, lambda: f64, m_x: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::arg(format!("need 0 < eps < 1, got {eps}")));
    }
    if !(lambda > 0.0) || !(m_x > 1.0) {
        return Err(Error::arg(format!("need lambda > 0 and M > 1, got {lambda}, {m_x}")));
    }
    Ok(1f64
        .min(eps * lambda.sqrt() / m_x)
        .min(eps * (1.0 - eps) * lambda / (m_x * m_x)))
}

/// Whether an experiment with separation radius `phi` and initial distance
/// `y0` lies in the regime covered by the bound for this `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRegime {
    pub phi_bar: f64,
    /// `eps * phi`.
    pub phi_prime: f64,
    pub satisfied: bool,
}

pub fn comparison_regime(eps: f64, lambda: f64, m_x: f64, phi: f64, y0: f64) -> Result<ComparisonRegime> {
    let phi_bar = comparison_radius(eps, lambda, m_x)?;
    let phi_prime = eps * phi;
    Ok(ComparisonRegime {
        phi_bar,
        phi_prime,
        satisfied: phi < phi_bar && y0 < phi_prime,
    })
}
