use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("signature mismatch: {left} vs {right}")]
    SignatureMismatch { left: String, right: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("not compatible with the operations: {0}")]
    NotCompatible(String),

    #[error("map is not a homomorphism: {0}")]
    NotHomomorphism(String),

    #[error("carrier size {size} exceeds bound {bound}")]
    SizeBound { size: usize, bound: usize },

    #[error("free algebra exceeds cap of {cap} elements (reached {reached})")]
    CapExceeded { cap: usize, reached: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("syntax error at byte {offset}: {msg}{}", expected_suffix(.expected))]
    Syntax {
        offset: usize,
        msg: String,
        expected: Vec<String>,
    },

    #[error("unbound name `{name}` at byte {offset}")]
    Unbound { name: String, offset: usize },

    #[error("unknown corpus entry `{0}`")]
    UnknownCorpus(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
