use thiserror::Error;

/// Unified error type for the whole engine.
///
/// Every variant carries a stable machine-readable code (see [`Error::code`])
/// that the CLI maps onto exit codes: parse/type errors exit 2, verification
/// failures exit 3, numeric singularity/sampling errors exit 4.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("E_TYPE_MISMATCH: {0}")]
    TypeMismatch(String),
    #[error("E_PORT_REUSED: port {0} used more than once")]
    PortReused(String),
    #[error("E_PORT_UNUSED: port {0} declared but never used")]
    PortUnused(String),
    #[error("E_PORT_NOT_FREE: port {0} is not free in this net")]
    PortNotFree(String),
    #[error("E_SIGNATURE_MISMATCH: {0}")]
    SignatureMismatch(String),
    #[error("E_PARSE: {msg} at line {line}, column {col}")]
    Parse { msg: String, line: usize, col: usize },
    #[error("E_UNBOUND_INDEX: index {0} is never bound")]
    UnboundIndex(String),
    #[error("E_REBOUND_INDEX: index {0} bound more than once with the same polarity")]
    ReboundIndex(String),
    #[error("E_EVAL_SINGULAR: {0}")]
    EvalSingular(String),
    #[error("E_UNBOUND_SYMBOL: no value for symbol {0}")]
    UnboundSymbol(String),
    #[error("E_SAMPLING_EXHAUSTED: could not find {0} non-singular sample points")]
    SamplingExhausted(String),
    #[error("E_SINGULAR_METRIC: metric is numerically singular on its domain ({0})")]
    SingularMetric(String),
}

impl Error {
    /// Stable machine-readable code for this error.
    pub fn code(&self) -> &'static str {
        match self {
            Error::TypeMismatch(_) => "E_TYPE_MISMATCH",
            Error::PortReused(_) => "E_PORT_REUSED",
            Error::PortUnused(_) => "E_PORT_UNUSED",
            Error::PortNotFree(_) => "E_PORT_NOT_FREE",
            Error::SignatureMismatch(_) => "E_SIGNATURE_MISMATCH",
            Error::Parse { .. } => "E_PARSE",
            Error::UnboundIndex(_) => "E_UNBOUND_INDEX",
            Error::ReboundIndex(_) => "E_REBOUND_INDEX",
            Error::EvalSingular(_) => "E_EVAL_SINGULAR",
            Error::UnboundSymbol(_) => "E_UNBOUND_SYMBOL",
            Error::SamplingExhausted(_) => "E_SAMPLING_EXHAUSTED",
            Error::SingularMetric(_) => "E_SINGULAR_METRIC",
        }
    }

    /// CLI exit code class: 2 = parse/type, 3 = verification, 4 = numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::TypeMismatch(_)
            | Error::PortReused(_)
            | Error::PortUnused(_)
            | Error::PortNotFree(_)
            | Error::SignatureMismatch(_)
            | Error::UnboundIndex(_)
            | Error::ReboundIndex(_)
            | Error::UnboundSymbol(_) => 2,
            Error::EvalSingular(_)
            | Error::SamplingExhausted(_)
            | Error::SingularMetric(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
