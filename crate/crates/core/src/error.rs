use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Best iterate reported when the likelihood search does not converge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestIterate {
    pub xi: f64,
    pub sigma: f64,
    pub loglik: f64,
    pub evaluations: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quantile at probability 1 is unbounded for xi >= 0")]
    UnboundedQuantile,

    #[error("moment of order {r} is infinite for xi = {xi} (requires r * xi < 1)")]
    InfiniteMoment { r: f64, xi: f64 },

    #[error("f* cannot be inverted at beta = 0")]
    Inversion,

    #[error("interarrival mean is infinite (pi0 = 1)")]
    InfiniteMean,

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("too few exceedances: found {found}, need at least {required}")]
    TooFewExceedances { found: usize, required: usize },

    #[error("likelihood search did not converge (best xi = {:.6}, sigma = {:.6}, loglik = {:.6})", best.xi, best.sigma, best.loglik)]
    NotConverged { best: BestIterate },

    #[error(
        "unstable denominator in frequency estimator (p = {p:.6}, q = {q:.6}, scale = {scale:.6})"
    )]
    UnstableDenominator { p: f64, q: f64, scale: f64 },

    #[error(
        "no transition curve carries mass (best count {best_count}, background {background:.1})"
    )]
    NoCurveMass { best_count: usize, background: f64 },

    #[error("quadrature failed to reach tolerance: estimate {estimate}, error {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
