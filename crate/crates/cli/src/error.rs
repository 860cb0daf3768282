use splitflow::SplitError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("numeric overflow in trajectory {trajectory} (field {field})")]
    Overflow { trajectory: String, field: usize },
    #[error("{0}")]
    Split(SplitError),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<SplitError> for CliError {
    fn from(e: SplitError) -> Self {
        match e {
            SplitError::NumericOverflow { field } => CliError::Overflow { trajectory: "unknown".into(), field },
            SplitError::InvalidArgument(msg) => CliError::Config(msg),
            other => CliError::Split(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Overflow { .. } => 3,
            _ => 1,
        }
    }
}
