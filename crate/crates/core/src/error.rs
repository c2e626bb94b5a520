use thiserror::Error;

/// Errors produced by the library.
///
/// Verification failures (diagnostics, report rows) are data, not errors;
/// an `Error` means an operation could not produce a result at all.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expression parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("schema error{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Schema { line: Option<usize>, message: String },

    #[error("model error: {0}")]
    Model(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("flow error: {0}")]
    Flow(String),

    #[error("construction error at {witness:?}: {message}")]
    Construction { message: String, witness: Vec<f64> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("lift error: {0}")]
    Lift(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
