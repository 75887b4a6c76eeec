use thiserror::Error;

/// Errors raised by the engine. Validation problems that are meant to be
/// reported rather than thrown live in [`crate::atlas::ValidationReport`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("context error: {0}")]
    Context(String),
    #[error("not a unit: {0}")]
    NotAUnit(String),
    #[error("parity error: {0}")]
    Parity(String),
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("degree of the zero element is undefined")]
    ZeroInput,
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("invalid atlas: {0}")]
    InvalidAtlas(String),
    #[error("invalid connection: {0}")]
    InvalidConnection(String),
    #[error("not a cocycle: {0}")]
    NotACocycle(String),
    #[error("value kind mismatch: {0}")]
    KindMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("parse error at {line}:{column}: {message}{}", expected_suffix(.expected))]
    Parse {
        line: usize,
        column: usize,
        message: String,
        expected: Vec<String>,
    },
    #[error("line {line} in [{section}]: {message}")]
    Semantic {
        line: usize,
        section: String,
        message: String,
    },
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
