use thiserror::Error;

/// Errors raised by the splitting engine and the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A flow produced a non-finite state or one whose norm exceeded the
    /// overflow ceiling.
    #[error("numeric overflow after applying field {field}")]
    NumericOverflow { field: usize },

    /// Triad data sits on the separatrix `E = enstrophy / |k|^2`, where the
    /// elliptic parametrization is singular.
    #[error("triad state is on the interface (relative gap {gap:e})")]
    InterfaceDegenerate { gap: f64 },

    #[error("elliptic parameter too close to 1 (complement {complement:e})")]
    DegenerateModulus { complement: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T, E = SplitError> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SplitError::InvalidArgument(msg.into()))
}
