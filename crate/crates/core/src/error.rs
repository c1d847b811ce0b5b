use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A point is outside the open domain of the barrier (or of a norm).
    #[error("domain error: {0}")]
    Domain(String),

    /// Damped Newton did not reach the requested decrement.
    #[error("solver did not converge after {iterations} iterations (last decrement {last_decrement:e})")]
    Convergence { iterations: usize, last_decrement: f64 },

    /// Malformed input: NaN/inf utilities, dimension mismatches, out-of-range values.
    #[error("input error: {0}")]
    Input(String),

    /// The stationary-distribution solve failed its residual test.
    #[error("numerical error: {message}; matrix = {matrix:?}")]
    Numerical { message: String, matrix: Vec<Vec<f64>> },

    /// A brute-force routine was asked for an instance that is too large.
    #[error("size error: {0}")]
    Size(String),

    /// A theorem checker was applied outside its stated hypotheses.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Inconsistent experiment or checker configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An error raised while running a given round of an experiment.
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by bad user input (CLI exit code 2).
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::AtStep { source, .. } => source.is_input_error(),
            Error::Input(_) | Error::Config(_) | Error::Parse(_) | Error::Io(_) | Error::Size(_) => {
                true
            }
            _ => false,
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            e @ Error::AtStep { .. } => e,
            e => Error::AtStep { step, source: Box::new(e) },
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
