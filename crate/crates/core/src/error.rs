use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("elements belong to different algebras")]
    AlgebraMismatch,
    #[error("postcondition violated: {0}")]
    PostconditionViolation(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("unsupported operator: {0}")]
    Unsupported(String),
    #[error("trace has no limit at its horizon: {0}")]
    NoLimit(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidInput(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
