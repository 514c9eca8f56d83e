use thiserror::Error;

/// Errors produced by the library. The CLI prints the `Display` text verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,
    #[error("symbol {symbol} outside alphabet [1, {q}]")]
    SymbolOutOfRange { symbol: u64, q: u32 },
    #[error("cannot parse word {0:?}")]
    WordSyntax(String),
    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(u32, u32),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("already k-universal (nu = {nu}, k = {k})")]
    AlreadyUniversal { nu: usize, k: usize },
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("no repeat found")]
    NoRepeatFound,
    #[error("dimension collapse: coordinate {coordinate} has extent 1")]
    DimensionCollapse { coordinate: usize },
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid selection: {0}")]
    InvalidSelection(String),
    #[error("invalid array: {0}")]
    InvalidArray(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("line violation on axis {axis} at {fixed:?}: {count} ones")]
    LineViolation {
        axis: usize,
        fixed: Vec<usize>,
        count: usize,
    },
    #[error("invalid d-permutation: {0}")]
    InvalidDPermutation(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
