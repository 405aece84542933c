use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("singular matrix: pivot {pivot:e} below threshold {threshold:e}")]
    SingularMatrix { pivot: f64, threshold: f64 },
    #[error("matrix is not Hermitian (‖H − H*‖ = {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("eigenvalue iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("matrix function is ill conditioned: paths disagree by {disagreement:e}")]
    IllConditionedFunction { disagreement: f64 },
    #[error("eigenvalue {eigenvalue} lies on the branch cut (−∞, 0] of the logarithm")]
    LogBranchCut { eigenvalue: Complex64 },

    #[error("evaluation point coincides with boundary point {0}")]
    CoincidentPoint(Complex64),
    #[error("invalid radius {0}")]
    InvalidRadius(f64),
    #[error("degenerate intersection: {0}")]
    DegenerateIntersection(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("disks are not nested: the exterior disk's circle is not inside the bounded disk")]
    NotNested,
    #[error("pole {pole} lies in the closed region")]
    PoleInRegion { pole: Complex64 },
    #[error("eigenvalue {eigenvalue} is outside the region or too close to its boundary")]
    SpectrumLeak { eigenvalue: Complex64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("negative input {name} = {value}")]
    NegativeInput { name: &'static str, value: f64 },
    #[error("no applicable K-spectral result; failed hypotheses: {}", failed.join("; "))]
    NoApplicableResult { failed: Vec<String> },
    #[error("series diverges for R = {0} (need R > 1)")]
    DivergentInput(f64),

    #[error("constraint point {0} lies in the closed region")]
    ConstraintInRegion(Complex64),
    #[error("non-finite function value at {0}")]
    NonFiniteValue(Complex64),
    #[error("pole {0} coincides with an eigenvalue")]
    PoleHitsSpectrum(Complex64),
    #[error("{0}")]
    InvalidArgument(String),

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether this error (possibly wrapped in a stage) is a failed hypothesis
    /// gate. An eigenvalue outside the region counts: no K can exist then.
    pub fn is_hypothesis_failure(&self) -> bool {
        match self {
            Error::NoApplicableResult { .. } | Error::HypothesisViolated(_) | Error::SpectrumLeak { .. } => true,
            Error::Stage { source, .. } => source.is_hypothesis_failure(),
            _ => false,
        }
    }

    pub(crate) fn in_stage(self, stage: &str) -> Error {
        Error::Stage { stage: stage.to_string(), source: Box::new(self) }
    }
}
