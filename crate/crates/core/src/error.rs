use thiserror::Error;

/// Errors produced by the matching engine, the synthesizers and the oracles.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Structurally invalid input: out-of-range or duplicate ids, size mismatches.
    #[error("malformed input: {0}")]
    Malformed(String),

    /// A text file could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A provisional state that deferred acceptance cannot start from.
    #[error("malformed state: {0}")]
    MalformedState(String),

    /// The input is well formed but outside the domain of the operation
    /// (e.g. a target matching that is not M-rational).
    #[error("precondition violated: {0}")]
    Domain(String),

    /// The flat-case synthesizer was called on an instance that is not flat.
    #[error("wrong entry point: {0}")]
    WrongEntryPoint(String),

    /// An internal invariant of a construction failed to hold.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A brute-force search space is larger than the configured limit.
    #[error("search space of {space} exceeds the oracle limit of {limit}")]
    OracleLimit { space: String, limit: u64 },

    /// A divorce simulation did not terminate within the guard.
    #[error("divorce strategies did not terminate after {0} divorces")]
    DivorceCycle(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
