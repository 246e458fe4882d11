use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("no sign change on bracket [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("root finder did not converge after {iterations} iterations (best x = {best}, |f| = {residual:e})")]
    NonConvergence {
        iterations: usize,
        best: f64,
        residual: f64,
    },

    #[error("quadrature tolerance not met: estimate {estimate}, achieved error {achieved:e}, requested {requested:e}")]
    ToleranceNotMet {
        estimate: Complex64,
        achieved: f64,
        requested: f64,
    },

    #[error("extrapolation needs at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("epsilon ladder is not geometric: {0}")]
    InvalidLadder(String),

    #[error("point ({t}, {x}) lies in the lightlike band; W is ill-conditioned at eps = {eps:e}")]
    IllConditionedLightlike { t: f64, x: f64, eps: f64 },

    #[error("point ({t}, {x}) lies on the light cone where D is a distributional boundary")]
    LightlikeBoundary { t: f64, x: f64 },

    #[error("row {row}: sample ({t}, {x}) lies in the lightlike band")]
    LightlikeSample { row: usize, t: f64, x: f64 },

    #[error("test function has nonzero mean {mean} (zero-mean combinations only)")]
    NonzeroMean { mean: Complex64 },

    #[error("vectors belong to different Krein contexts ({left:016x} vs {right:016x})")]
    ContextMismatch { left: u64, right: u64 },

    #[error("context validation failed: {0}")]
    ContextValidation(String),

    #[error("Gram matrix is not Hermitian: deviation {deviation:e} exceeds {limit:e}")]
    NonHermitian { deviation: f64, limit: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoSignChange { .. } => 3,
            Error::NonConvergence { .. } => 4,
            Error::ToleranceNotMet { .. } => 5,
            Error::ContextValidation(_) | Error::ContextMismatch { .. } => 6,
            Error::IllConditionedLightlike { .. } | Error::LightlikeBoundary { .. } | Error::LightlikeSample { .. } => 7,
            _ => 2,
        }
    }
}
