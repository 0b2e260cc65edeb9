use thiserror::Error;

/// Errors raised by the library. Each variant maps onto a CLI exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("vertex ({level},{index}) has no outgoing edge")]
    NoOutgoingEdge { level: usize, index: usize },

    #[error("invalid source declaration: {0}")]
    Sources(String),

    #[error("resolution mismatch: {0}")]
    Resolution(String),

    #[error("invalid path: {0}")]
    Path(String),

    #[error("non-composable pair: {0}")]
    NotComposable(String),

    #[error("strata mismatch: lengths {0} and {1}")]
    StrataMismatch(u128, u128),

    #[error("resolution too small to certify completeness of the ball of radius {t} (l_(D+1) = {next})")]
    IncompleteBall { t: f64, next: u128 },

    #[error("spectral iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("undefined symbol value on support class {0}")]
    UndefinedSymbol(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("invalid measure: {0}")]
    Measure(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unknown strategy '{name}' for {registry}; known: {known}")]
    UnknownStrategy {
        registry: &'static str,
        name: String,
        known: String,
    },

    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
