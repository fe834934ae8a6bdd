use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions {dims:?}: {reason}")]
    InvalidDims { dims: Vec<usize>, reason: String },

    #[error("split index {split} out of range for a tensor of order {order}")]
    SplitOutOfRange { split: usize, order: usize },

    #[error("size mismatch: expected {expected} elements, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("bond mismatch: trailing bond {left} does not match leading bond {right}")]
    BondMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimsMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("invalid TT ranks {ranks:?} for dims {dims:?}: {reason}")]
    InvalidRanks {
        dims: Vec<usize>,
        ranks: Vec<usize>,
        reason: String,
    },

    #[error("base point is rank deficient: declared ranks {declared:?}, numerical ranks {found:?}")]
    RankDeficientBase {
        declared: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("base point is not left-orthogonal (residual {residual:.3e} at core {core})")]
    NotLeftOrthogonal { core: usize, residual: f64 },

    /// The projected residual at `split` has more than `slack` singular values
    /// above `threshold`.
    #[error("not in the tangent cone: split {split} has residual rank {rank} > slack {slack}")]
    NotInCone {
        split: usize,
        rank: usize,
        slack: usize,
        threshold: f64,
        spectrum: Vec<f64>,
    },

    #[error("degenerate channels at core {core}: channel residual {residual:.3e}")]
    DegenerateChannels { core: usize, residual: f64 },

    #[error("invalid block shape: {0}")]
    BlockShape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
