use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("courant number {nu} outside stable range [0, {limit}]; substep the update")]
    Stability { nu: f64, limit: f64 },

    #[error(
        "domain too small at t = {time}: boundary leak {leak:e} exceeds threshold {threshold:e}"
    )]
    DomainTooSmall {
        time: f64,
        leak: f64,
        threshold: f64,
    },
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }
}
