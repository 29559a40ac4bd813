use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate angle alpha = {alpha}: sin(alpha) vanishes, use the identity/reflection path")]
    DegenerateAngle { alpha: f64 },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("sequence of length {len} too short for difference order {order}")]
    SequenceTooShort { len: usize, order: usize },
    #[error("insufficient samples: need {needed}, have {have}")]
    InsufficientSamples { needed: usize, have: usize },
    #[error("rank-deficient annihilation system")]
    RankDeficient,
    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("root off the unit circle (|z| = {modulus})")]
    OffCircleRoot { modulus: f64 },
    #[error("singular Vandermonde system (colliding instants)")]
    SingularSystem,
    #[error("window index {index} lies inside the band")]
    WindowOverlapsBand { index: usize },
    #[error("sampling criterion violated: Q = {q} but at least {required_q} samples are required")]
    CriterionViolation { required_q: usize, q: usize },
    #[error("estimation failure: relative annihilation residual {residual:e} exceeds tolerance")]
    EstimationFailure { residual: f64 },
    #[error("weight {value} is not within tolerance of the 2*lambda grid")]
    SnapFailure { value: f64 },
    #[error("reference signal is identically zero")]
    ZeroReference,
}

/// Coarse failure category, used by the sweep harness and the CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Input,
    Criterion,
    Estimation,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::CriterionViolation { .. } => ErrorKind::Criterion,
            Error::RankDeficient
            | Error::NoConvergence { .. }
            | Error::OffCircleRoot { .. }
            | Error::SingularSystem
            | Error::EstimationFailure { .. }
            | Error::SnapFailure { .. }
            | Error::InsufficientSamples { .. } => ErrorKind::Estimation,
            _ => ErrorKind::Input,
        }
    }

    /// Short stable tag for tables and summaries.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::DegenerateAngle { .. } => "degenerate_angle",
            Error::NonFinite { .. } => "non_finite",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::SequenceTooShort { .. } => "sequence_too_short",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::RankDeficient => "rank_deficient",
            Error::NoConvergence { .. } => "no_convergence",
            Error::OffCircleRoot { .. } => "off_circle_root",
            Error::SingularSystem => "singular_system",
            Error::WindowOverlapsBand { .. } => "window_overlaps_band",
            Error::CriterionViolation { .. } => "criterion_violation",
            Error::EstimationFailure { .. } => "estimation_failure",
            Error::SnapFailure { .. } => "snap_failure",
            Error::ZeroReference => "zero_reference",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
