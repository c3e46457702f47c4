use thiserror::Error;

/// Errors produced by the sphere, harmonics, filter and frame modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("harmonic index out of range: l={l}, m={m}, spin={spin}")]
    IndexOutOfRange { l: i64, m: i64, spin: i32 },

    #[error("spin-{spin} field cannot be evaluated at a pole (theta={theta})")]
    PoleEvaluation { spin: i32, theta: f64 },

    #[error("grid bandlimit {grid} too coarse for requested bandlimit {requested}")]
    GridTooCoarse { grid: usize, requested: usize },

    #[error("spin mismatch: expected {expected}, got {got}")]
    SpinMismatch { expected: i32, got: i32 },

    #[error("measure constant c0={requested} too large for this construction; achievable c0 is {achievable}")]
    MeasureConstant { requested: f64, achievable: f64 },

    #[error("partition constraint violated: {0}")]
    PartitionConstraint(String),

    #[error("scale-sum tail not certifiable over j in [{j_lo}, {j_hi}]: bound {bound:.3e} exceeds {required:.3e}")]
    TailNotCertifiable {
        j_lo: i64,
        j_hi: i64,
        bound: f64,
        required: f64,
    },

    #[error("admissibility failure: scanned minimum {min:.3e} of the scale sum is below {threshold:.3e}")]
    AdmissibilityFailure { min: f64, threshold: f64 },

    #[error("conjugate gradients did not converge in {iterations} iterations (residual {residual:.3e}, condition estimate {condition:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        condition: f64,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
