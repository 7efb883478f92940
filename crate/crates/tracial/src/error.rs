use std::fmt;

/// Process exit status of the command-line runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Refuted = 1,
    InputError = 2,
    NumericFailure = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// An error with the exit status it maps to.
#[derive(Debug, thiserror::Error)]
pub struct RunError {
    pub status: ExitStatus,
    pub message: String,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl RunError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { status: ExitStatus::InputError, message: message.into() }
    }

    pub fn refuted(message: impl Into<String>) -> Self {
        Self { status: ExitStatus::Refuted, message: message.into() }
    }
}

impl From<tracial_core::Error> for RunError {
    fn from(e: tracial_core::Error) -> Self {
        use tracial_core::Error as E;
        let status = match e {
            E::NumericFailure(_) | E::PostconditionViolation(_) => ExitStatus::NumericFailure,
            E::NoLimit(_) => ExitStatus::Refuted,
            E::InvalidInput(_) | E::ShapeMismatch(_) | E::AlgebraMismatch | E::Unsupported(_) => ExitStatus::InputError,
        };
        Self { status, message: e.to_string() }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        Self::input(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        Self::input(format!("malformed JSON: {e}"))
    }
}

impl From<toml::de::Error> for RunError {
    fn from(e: toml::de::Error) -> Self {
        Self::input(format!("malformed TOML: {e}"))
    }
}

pub type RunResult<T> = Result<T, RunError>;

#[cfg(test)]
mod tests {
    use super::*;
    use tracial_core::Error;

    #[test]
    fn exit_codes_follow_the_contract() {
        let status = |e: Error| RunError::from(e).status.code();
        assert_eq!(status(Error::InvalidInput("x".into())), 2);
        assert_eq!(status(Error::AlgebraMismatch), 2);
        assert_eq!(status(Error::NumericFailure("x".into())), 3);
        assert_eq!(status(Error::PostconditionViolation("x".into())), 3);
        assert_eq!(status(Error::NoLimit("x".into())), 1);
        assert_eq!(RunError::refuted("r").status, ExitStatus::Refuted);
    }
}
