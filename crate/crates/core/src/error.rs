use alloc::boxed::Box;
use alloc::string::String;

use crate::ica::IcaResult;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("singular data: {deficient} of {dims} covariance eigenvalues at or below the floor")]
    SingularData { deficient: usize, dims: usize },

    #[error("separation failed: no component converged")]
    SeparationFailed { partial: Box<IcaResult> },

    #[error("shift register initial state must be nonzero")]
    ZeroState,

    #[error("feedback polynomial {poly:#x} does not generate a maximal-length sequence")]
    NotPrimitive { poly: u32 },

    #[error("polynomials {first:#x} and {second:#x} are not a preferred pair")]
    InvalidPreferredPair { first: u32, second: u32 },

    #[error("code index {index} out of range ({available} codes)")]
    CodeIndex { index: usize, available: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported: {0}")]
    Unsupported(&'static str),
}
