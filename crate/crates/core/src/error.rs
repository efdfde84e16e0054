use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("invalid plant spec: {0}")]
    Spec(String),

    #[error("zero has no inverse modulo {p}")]
    ZeroInverse { p: u64 },

    #[error("{0} is not an odd prime")]
    NotPrime(u64),

    #[error("matrix has {rows} rows but {cols} columns; need rows >= cols")]
    ShapeMismatch { rows: usize, cols: usize },

    #[error("requested {requested} pairwise independent vectors in F_{p}^{dim}, capacity is {capacity}")]
    Capacity {
        requested: usize,
        capacity: u128,
        dim: usize,
        p: u64,
    },

    #[error("generators have numerical rank {rank} < {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed certificate: {0}")]
    Schema(String),

    #[error("list lengths differ: {truth} truth vs {recovered} recovered")]
    LengthMismatch { truth: usize, recovered: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("bound violated: {0}")]
    Bound(String),

    #[error("invalid mode selection: {0}")]
    Mode(String),

    #[error("flattening has numerical rank {rank}, expected {expected}")]
    Rank { rank: usize, expected: usize },

    #[error("tensor is not symmetric (max deviation {0:e})")]
    Symmetry(f64),
}
