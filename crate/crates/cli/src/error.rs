use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file, weights or output location.
    Config(String),
    /// Failure inside the numerics.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dimmax_core::Error> for CliError {
    fn from(e: dimmax_core::Error) -> Self {
        use dimmax_core::Error as E;
        match e {
            E::Numeric(_) | E::NonConvergence { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
