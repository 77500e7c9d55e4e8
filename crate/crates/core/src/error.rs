use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("B1 bound undefined: alpha0 = {alpha0} must exceed C'_mu1 + |mu2| = {threshold}")]
    DivisionGuard { alpha0: f64, threshold: f64 },

    #[error(
        "mesh Peclet condition violated at node {node} (x = {x}): h*|mu|/sigma^2 = {peclet} >= 2; refine the grid"
    )]
    PecletViolation { node: usize, x: f64, peclet: f64 },

    #[error("tridiagonal system is not strictly diagonally dominant at node {node} (x = {x})")]
    NotDiagonallyDominant { node: usize, x: f64 },

    #[error("scaling function value {value} at (x = {x}, p = {p}) is outside ({eps_s}, {m_s})")]
    ScalingBound {
        x: f64,
        p: f64,
        value: f64,
        eps_s: f64,
        m_s: f64,
    },

    #[error("closed-form argmin requires a problem built from the example class")]
    RuleMismatch,

    #[error("diffusion matrix is numerically singular at step {step}")]
    SingularDiffusion { step: u64 },

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("expression error: {0}")]
    Expr(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors that come from file or stream handling rather than
    /// from the numerics or the inputs.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            Error::Iteration { source, .. } => source.is_io(),
            _ => false,
        }
    }

    /// True for errors caused by invalid inputs or arguments.
    pub fn is_argument(&self) -> bool {
        match self {
            Error::InvalidArgument(_) | Error::Expr(_) | Error::RuleMismatch => true,
            Error::Iteration { source, .. } => source.is_argument(),
            _ => false,
        }
    }
}
