use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("root finding failed: {0}")]
    RootFindingFailed(String),
    #[error("branch ambiguous near z = {re}{im:+}i")]
    BranchAmbiguous { re: f64, im: f64 },
    #[error("quadrature did not converge (estimated error {est_error:e})")]
    QuadratureNoConvergence { est_error: f64 },
    #[error("no decay sector passed the monotonicity check at R = {radius}")]
    SectorDegenerate { radius: f64 },
    #[error("path blocked: {0}")]
    PathBlocked(String),
    #[error("path invalid: {0}")]
    PathInvalid(String),
    #[error("no independent pair (wronskian magnitudes {0:?})")]
    NoIndependentPair(Vec<f64>),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("normalization reference value is zero")]
    NormalizationDegenerate,
    #[error("q = {0} is at a turning point")]
    AtTurningPoint(f64),
    #[error("x = {0} outside the supported window")]
    OutOfWindow(f64),
    #[error("bad boundary: {0}")]
    BadBoundary(String),
    #[error("ill-conditioned fit (condition number {0:e})")]
    IllConditionedFit(f64),
}

impl Error {
    pub(crate) fn branch(z: num_complex::Complex64) -> Self {
        Error::BranchAmbiguous { re: z.re, im: z.im }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
