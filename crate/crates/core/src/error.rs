use thiserror::Error;

use crate::radial_basis::BasisIndex;
use crate::synthesis::SynthesisReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite integrand value {value} at r = {abscissa}")]
    NonFiniteIntegrand { abscissa: f64, value: f64 },

    #[error("degenerate boundary for {index}: theta(1) = {boundary} must be nonzero")]
    DegenerateBoundary { index: BasisIndex, boundary: f64 },

    #[error("boundary clamp violated for {index}: theta(1) = {actual}, expected {expected}")]
    BoundaryMismatch {
        index: BasisIndex,
        expected: f64,
        actual: f64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("missing table entry {0}")]
    MissingEntry(BasisIndex),

    #[error("degenerate radial function {index}: norm integral {integral:e}")]
    DegenerateFunction { index: BasisIndex, integral: f64 },

    #[error("singular Newton system for {index}")]
    SingularSystem { index: BasisIndex },

    #[error(
        "Newton iteration for {} did not converge after {} iterations (residual {:e})",
        report.index, report.iterations, report.final_residual
    )]
    NonConvergence { report: SynthesisReport },

    #[error("every initial guess for {index} converged to a non-monotone phase (min slope {min_slope:e})")]
    BranchRejected { index: BasisIndex, min_slope: f64 },

    #[error("no initial-guess strategy applies to {index}")]
    NoApplicableGuess { index: BasisIndex },

    #[error("unknown guess strategy `{0}`")]
    UnknownStrategy(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// Basis index the error refers to, when there is one.
    pub fn index(&self) -> Option<BasisIndex> {
        match self {
            Error::DegenerateBoundary { index, .. }
            | Error::BoundaryMismatch { index, .. }
            | Error::DegenerateFunction { index, .. }
            | Error::SingularSystem { index }
            | Error::BranchRejected { index, .. }
            | Error::NoApplicableGuess { index } => Some(*index),
            Error::MissingEntry(index) => Some(*index),
            Error::NonConvergence { report } => Some(report.index),
            _ => None,
        }
    }
}
