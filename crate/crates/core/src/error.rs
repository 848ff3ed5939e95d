use thiserror::Error;

/// Errors raised by lattice, rule, engine, search and quantum operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid torus: {0}")]
    InvalidTorus(String),

    #[error("cell {cell} is not on a torus of shape {dims}")]
    CellOffTorus { cell: String, dims: String },

    #[error("symbol index {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("alphabet mismatch between operands")]
    AlphabetMismatch,

    #[error("empty region")]
    EmptyRegion,

    #[error("region mismatch: {0}")]
    RegionMismatch(String),

    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("{phase} phase is not a bijection: words {first} and {second} both map to {image}")]
    NonBijective {
        phase: String,
        first: String,
        second: String,
        image: String,
    },

    #[error("table too large: {0}")]
    TooLarge(String),

    #[error("search space of {candidates} halo configurations exceeds the enumeration cap of {cap}")]
    CapExceeded { candidates: u128, cap: u128 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid constraints: {0}")]
    InvalidConstraints(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quantum: {0}")]
    Quantum(String),
}

/// A located syntax error in one of the text formats.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
