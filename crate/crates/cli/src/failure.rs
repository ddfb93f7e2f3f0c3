use std::fmt;
use std::io;
use std::path::Path;

use mussel_bif::ErrorCategory;

/// Terminal error of one invocation, carrying its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Malformed configuration, flags or numeric options.
    Usage(String),
    /// The parameters violate a standing hypothesis of the requested analysis.
    Hypothesis(String),
    /// A computation failed or an oracle disagreed.
    Numerical(String),
    /// Reading or writing a file failed.
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Hypothesis(_) => 3,
            Failure::Numerical(_) => 4,
            Failure::Io(_) => 5,
        }
    }

    pub fn io(path: &Path, err: io::Error) -> Self {
        Failure::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            Failure::Usage(m) => ("usage", m),
            Failure::Hypothesis(m) => ("hypothesis", m),
            Failure::Numerical(m) => ("numerical", m),
            Failure::Io(m) => ("io", m),
        };
        write!(f, "{kind} error: {msg}")
    }
}

impl From<mussel_bif::Error> for Failure {
    fn from(e: mussel_bif::Error) -> Self {
        let msg = e.to_string();
        match e.category() {
            ErrorCategory::Input => Failure::Usage(msg),
            ErrorCategory::Hypothesis => Failure::Hypothesis(msg),
            ErrorCategory::Numerical => Failure::Numerical(msg),
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;
