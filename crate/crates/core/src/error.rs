use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on shapes or structure was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("matrix is not orthogonal: ||H^T H - I||_F = {residual:.3e}")]
    NotOrthogonal { residual: f64 },

    #[error("basis is not orthonormal: ||U^T U - I||_F = {residual:.3e}")]
    NotOrthonormal { residual: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("initial block residual rank-deficient (rank {rank} < block size {block_size})")]
    RankDeficientStart { rank: usize, block_size: usize },

    #[error("operator range exhausted at iteration {iteration}: no room for {needed} replacement vector(s)")]
    RangeExhausted { iteration: usize, needed: usize },

    #[error("Arnoldi basis degenerate: R factor singular at iteration {iteration}")]
    DegenerateBasis { iteration: usize },

    #[error("relation requires nonsingular H (rank_r = {rank} < {block_size})")]
    SingularHessenberg { rank: usize, block_size: usize },

    #[error("Y2 factor is singular (numerical rank {rank} < {block_size})")]
    SingularY2 { rank: usize, block_size: usize },

    #[error("iteration {requested} is beyond the run length {available}")]
    IterationOutOfRange { requested: usize, available: usize },

    #[error("matrix market parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported matrix market format: {0}")]
    UnsupportedFormat(String),

    #[error("file not found: {path}{}", if hint.is_empty() { String::new() } else { format!(" ({hint})") })]
    MissingFile { path: PathBuf, hint: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
