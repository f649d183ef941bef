use thiserror::Error;

use crate::solver::SpectralRecord;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid circuit parameters: {0}")]
    InvalidParams(String),

    #[error("free mode not removable: the sum-coordinate capacitance block is singular (no ground capacitance)")]
    FreeModeNotRemovable,

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("size guard: dimension {dim} exceeds limit {limit}")]
    SizeGuard { dim: usize, limit: usize },

    #[error("linearization invalid for this impedance: 8E_C/E_J = {ratio} has no root on the physical branch")]
    LinearizationInvalid { ratio: f64 },

    #[error("degenerate trial state: norm {norm:.3e} after applying creation operator on mode {mode}")]
    DegenerateTrial { mode: usize, norm: f64 },

    #[error("lost target: maximal overlap {overlap:.3e} below threshold for consecutive sweeps")]
    LostTarget { overlap: f64, record: Box<SpectralRecord> },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("unconverged input: {0}")]
    Unconverged(String),

    #[error("singular matrix: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;
