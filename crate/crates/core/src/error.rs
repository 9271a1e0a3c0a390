use thiserror::Error;

/// Errors raised by contract violations across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("depth mismatch: {0} vs {1}")]
    DepthMismatch(u32, u32),

    #[error("rank {rank} exceeds available depth {depth}")]
    RankExceedsDepth { rank: u32, depth: u32 },

    #[error("depth {available} too small, need at least {needed}")]
    DepthTooSmall { needed: u32, available: u32 },

    #[error("cube index does not fit below rank {rank}")]
    IndexOutOfRange { rank: u32 },

    #[error("Walsh index has a component >= 2^{rank}; value is not constant on a rank-{rank} cube")]
    NotConstantOnCube { rank: u32 },

    #[error("sign matrix of order 2^{0} is too large to materialize (cap k <= {1})")]
    MatrixTooLarge(u32, u32),

    #[error("Dirichlet kernel order {order} exceeds 2^{rank}")]
    KernelOrderTooLarge { order: u64, rank: u32 },

    #[error("kernel order must be positive")]
    KernelOrderZero,

    #[error("integer overflow in kernel evaluation")]
    KernelOverflow,

    #[error("quasimeasure is only defined up to rank {max_rank}, got {rank}")]
    RankBeyondRule { rank: u32, max_rank: u32 },

    #[error("set predicate is inconsistent: {0}")]
    InconsistentPredicate(String),

    #[error("value is not a dyadic rational (exact division by {0} failed)")]
    NonDyadicValue(u64),

    #[error("stage {stage} out of range (configured stages: {max})")]
    StageOutOfRange { stage: u32, max: u32 },

    #[error("Walsh index lies in no diagonal block")]
    NotInBlock,

    #[error("enumeration of 2^{bits} items exceeds the cap 2^{cap}")]
    EnumerationTooLarge { bits: u64, cap: u64 },

    #[error("invalid permutation: {0}")]
    BadPermutation(String),

    #[error("base index out of range: {0}")]
    BaseIndexOutOfRange(String),

    #[error("rank {rank} is not of stage form for this stage sequence")]
    RankNotStageShaped { rank: u32 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
