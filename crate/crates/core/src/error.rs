use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("participant {index} out of range for {n} participants")]
    ParticipantOutOfRange { index: usize, n: usize },

    /// No invertible submatrix avoiding the target column exists. For a
    /// connected structure this means the rows belong to an authorized set.
    #[error("row not unauthorized-consistent")]
    NotUnauthorizedConsistent,

    #[error("unauthorized set")]
    Unauthorized,

    #[error("cannot contract at authorized set")]
    AuthorizedContraction,

    #[error("scheme is not ideal")]
    NotIdeal,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} participants is too many for subset enumeration")]
    TooLarge(usize),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("missing contraction key entry for row {0}")]
    MissingKey(usize),

    #[error("unauthorized attribute set")]
    UnauthorizedAttributes,

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("serialization: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors that report a refused operation on an unauthorized
    /// (or authorized, for contraction) set rather than malformed input.
    pub fn is_authorization_failure(&self) -> bool {
        matches!(
            self,
            Error::Unauthorized | Error::UnauthorizedAttributes | Error::AuthorizedContraction
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.line() > 0 {
            Error::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        } else {
            Error::Serde(e.to_string())
        }
    }
}
