use thiserror::Error;

/// Failure modes shared by the analysis pipeline and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("mode {n} admits no purely imaginary crossing")]
    NotInS0 { n: usize },

    #[error("no mode in 0..={n_max} admits a purely imaginary crossing")]
    EmptyS0 { n_max: usize },

    #[error("(i*omega, tau) is not a characteristic root: residual {residual:e}")]
    NonCrossing { residual: f64 },

    #[error("resonance: {0}")]
    Resonance(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("integration blew up at t = {t}: |field| = {value:e}")]
    BlowUp { t: f64, value: f64 },

    #[error("negative field at t = {t}: {value:e}")]
    NegativeField { t: f64, value: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Coarse category used for process exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidParameter(_) => ErrorCategory::Input,
            Error::HypothesisViolation(_) | Error::NotInS0 { .. } | Error::EmptyS0 { .. } => {
                ErrorCategory::Hypothesis
            }
            _ => ErrorCategory::Numerical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Input,
    Hypothesis,
    Numerical,
}

pub type Result<T> = std::result::Result<T, Error>;
