use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The center weight of the jump kernel went negative: `tau` exceeds the
    /// stability bound.
    #[error("stability violation: q0 = {q0:.3e} < 0 (tau = {tau:.6e}, tau_max = {tau_max:.6e})")]
    StabilityViolation { q0: f64, tau: f64, tau_max: f64 },

    #[error(
        "lattice truncation too coarse: tail estimate {tail:.3e} is {ratio:.3e} of Q(h) \
         (tolerance {tolerance:.1e}); increase trunc_k"
    )]
    TruncationTooCoarse { tail: f64, ratio: f64, tolerance: f64 },

    #[error("coefficient table horizon {horizon} does not cover step {step}")]
    HistoryMissing { horizon: usize, step: usize },

    #[error("aliasing: transform at the frequency cutoff is {value:.3e} (> {tolerance:.1e})")]
    Aliasing { value: f64, tolerance: f64 },

    #[error("Laplace tail e^(-s t_N) = {tail:.3e} exceeds {tolerance:.1e}; extend the sequence")]
    LaplaceTail { tail: f64, tolerance: f64 },

    #[error("coefficient table and kernel disagree: {0}")]
    Mismatch(String),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::StabilityViolation { .. } => 3,
            Error::TruncationTooCoarse { .. } | Error::Aliasing { .. } | Error::LaplaceTail { .. } => 4,
            _ => 2,
        }
    }
}
