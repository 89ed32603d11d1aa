//! Crate-wide error type.

use std::fmt;
use std::io;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// An index exceeded its dimension. `dim` names the violated dimension.
    Bounds {
        dim: &'static str,
        index: usize,
        limit: usize,
    },
    /// Tensor shape did not match what the operation requires.
    Shape { expected: String, got: String },
    /// A precondition on an argument value was violated.
    InvalidArgument(String),
    /// A shuffle plan is inconsistent with the tensor it is applied to.
    Plan(String),
    /// A backward tape was reused or does not match the upstream gradient.
    Tape(String),
    /// A layer failed during forward/backward; `index` is the node position.
    Layer { index: usize, source: Box<Error> },
    /// Malformed dataset file. `offset` is the byte position of the problem.
    Format { offset: u64, message: String },
    /// Dataset statistics are unusable (e.g. zero standard deviation).
    Stats(String),
    /// Run configuration problem; `field` is the offending key path.
    Config { field: String, message: String },
    /// Checkpoint file is corrupt or does not match the model.
    Checkpoint(String),
    Io(io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Bounds { dim, index, limit } => {
                write!(f, "index {index} out of bounds for {dim} (limit {limit})")
            }
            Error::Shape { expected, got } => {
                write!(f, "shape mismatch: expected {expected}, got {got}")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Plan(msg) => write!(f, "invalid shuffle plan: {msg}"),
            Error::Tape(msg) => write!(f, "tape error: {msg}"),
            Error::Layer { index, source } => write!(f, "layer {index}: {source}"),
            Error::Format { offset, message } => {
                write!(f, "{message} at offset {offset}")
            }
            Error::Stats(msg) => write!(f, "dataset statistics error: {msg}"),
            Error::Config { field, message } => write!(f, "config `{field}`: {message}"),
            Error::Checkpoint(msg) => write!(f, "checkpoint error: {msg}"),
            Error::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Layer { source, .. } => Some(source),
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(e: io::Error) -> Self {
        Error::Io(e)
    }
}

impl Error {
    /// Wraps an error as occurring inside the network node at `index`.
    pub fn at_layer(self, index: usize) -> Error {
        Error::Layer {
            index,
            source: Box::new(self),
        }
    }
}
