use std::fmt;

/// Command failures, each mapped to a process exit status.
#[derive(Debug)]
pub enum Failure {
    /// Malformed config, invalid parameters or bad arguments.
    Usage(String),
    /// Input violates a hypothesis of the verified statements.
    Hypothesis(String),
    /// Output could not be written.
    Io(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 64,
            Failure::Hypothesis(_) => 2,
            Failure::Io(_) => 74,
        }
    }

    /// Classifies a library error raised while running a suite.
    pub fn from_core(err: jessen_core::Error, context: &str) -> Self {
        if err.is_hypothesis_violation() {
            Failure::Hypothesis(format!("{context}: {err}"))
        } else {
            Failure::Usage(format!("{context}: {err}"))
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "error: {m}"),
            Failure::Hypothesis(m) => write!(f, "hypothesis violation: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}
