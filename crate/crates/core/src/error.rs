use thiserror::Error;

/// Errors shared by every layer of the crate.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum LatticeError {
    #[error("space mismatch: {left} vs {right} ({context})")]
    SpaceMismatch {
        left: String,
        right: String,
        context: &'static str,
    },

    #[error("operator is not an endomorphism: domain {domain}, codomain {codomain}")]
    NotEndomorphism { domain: String, codomain: String },

    #[error("matrix is {rows}x{cols} but the spaces require {expected_rows}x{expected_cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },

    #[error("space dimension must be positive")]
    EmptySpace,

    #[error("weight at index {index} is not strictly positive")]
    NonPositiveWeight { index: usize },

    #[error("diagonal entry at index {index} is negative ({value})")]
    NegativeDiagonal { index: usize, value: String },

    #[error("diagonal has {len} entries but its space has dimension {dim}")]
    DiagonalLength { len: usize, dim: usize },

    #[error("dyadic depth {depth} is smaller than the sequence dimension {dim}")]
    DepthTooSmall { depth: usize, dim: usize },

    #[error("no exact square root: {value} is not a perfect square")]
    InexactSqrt { value: String },

    #[error("need at least {min} blocks, got {got}")]
    TooFewBlocks { min: usize, got: usize },

    #[error("space does not split into two identical halves: {reason}")]
    BadSwitchSplit { reason: String },

    #[error("malformed descriptor: {0}")]
    BadDescriptor(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("cannot parse {input:?} as a number: {reason}")]
    Parse { input: String, reason: &'static str },

    #[error("matrix file error: {0}")]
    MatrixIo(String),
}

pub type Result<T> = std::result::Result<T, LatticeError>;
