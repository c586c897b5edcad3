use fpp_core::FppError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Spec file unreadable, malformed, or semantically invalid.
    #[error("invalid spec: {0}")]
    Spec(String),

    #[error(transparent)]
    Core(#[from] FppError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Spec(_) => 2,
            Self::Core(e) => match e {
                FppError::InvalidInput(_) | FppError::Parse { .. } | FppError::Unsupported(_) => 2,
                FppError::Budget { .. } => 3,
                FppError::InvariantViolation(_) => 4,
                FppError::Io(_) => 1,
            },
            Self::Io(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn spec_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Spec(msg.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(CliError::Spec("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(FppError::InvalidInput("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(FppError::Budget { what: "x".into(), required: 2.0, limit: 1.0 }).exit_code(), 3);
        assert_eq!(CliError::Core(FppError::InvariantViolation("x".into())).exit_code(), 4);
        assert_eq!(CliError::Io(std::io::Error::other("x")).exit_code(), 1);
    }
}
