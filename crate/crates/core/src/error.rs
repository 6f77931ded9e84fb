use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    /// The input does not have full column rank, e.g. the polar projection
    /// of a rank-deficient matrix.
    #[error("matrix is not of full rank (smallest pivot or eigenvalue {smallest:e})")]
    RankDeficient { smallest: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// The target point sits on or near the cut locus of the base point, so
    /// the logarithm is not uniquely defined or the iteration stagnated.
    #[error("logarithm undefined: target is near the cut locus ({detail})")]
    CutLocus { detail: &'static str },

    #[error("point is not on the Stiefel manifold (orthogonality defect {defect:e})")]
    NotOnManifold { defect: f64 },

    #[error("vector is not tangent at its base point (defect {defect:e})")]
    NotTangent { defect: f64 },

    #[error("tangent vectors are based at different points")]
    BaseMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("variance {value} exceeds the manifold maximum {maxvar}")]
    VarianceExceedsMaximum { value: f64, maxvar: f64 },

    #[error(
        "unreliable Monte Carlo estimate: {failures} of {samples} samples failed \
         (partial estimate {estimate}, std error {std_error})"
    )]
    UnreliableEstimate {
        estimate: f64,
        std_error: f64,
        samples: usize,
        failures: usize,
    },

    #[error("filter step {index} failed: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for the two logarithm failure modes.
    pub fn is_log_failure(&self) -> bool {
        match self {
            Error::NoConvergence { .. } | Error::CutLocus { .. } => true,
            Error::Step { source, .. } => source.is_log_failure(),
            _ => false,
        }
    }
}
