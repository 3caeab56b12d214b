use std::process::ExitCode;

use glvp_core::{Error, NotGlvp};

/// Command failures, each tied to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed or inconsistent input, and errors from transformations.
    #[error("{0}")]
    Input(String),

    #[error("not GLVP: {0}")]
    NotGlvp(NotGlvp),

    /// At least one conserved quantity drifted past the requested tolerance.
    #[error("conservation drift {drift:e} exceeds tolerance {tol:e}")]
    Drift { drift: f64, tol: f64 },

    /// The trajectory does not exist on the requested interval.
    #[error("integration failed: {0}")]
    Integration(Error),

    /// The property suite found counterexamples.
    #[error("{0} property checks failed")]
    Verification(usize),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn field(field: &str, message: String) -> Self {
        CliError::Input(format!("field {field}: {message}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::NotGlvp(_) => 3,
            CliError::Drift { .. } => 4,
            CliError::Integration(_) => 5,
            CliError::Verification(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::BlowUp { .. } | Error::StepUnderflow { .. } => CliError::Integration(e),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<&CliError> for ExitCode {
    fn from(e: &CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}
