use thiserror::Error;

/// Errors raised by constructors, operations and experiment runs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range 1..={max}")]
    OutOfRange { index: usize, max: usize },

    #[error("enumeration budget exceeded: {needed} > {budget}")]
    Budget { needed: u128, budget: u128 },

    #[error("step ceiling of {ceiling} reached with {remaining} cells unvisited")]
    StepCeiling { ceiling: u64, remaining: usize },

    #[error("{completed} of {requested} trials completed before abort: {source}")]
    TrialsAborted {
        completed: usize,
        requested: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("outside applicability window: {0}")]
    Applicability(String),

    #[error("driver is not mixing: second eigenvalue modulus {0} >= 1")]
    NotMixing(f64),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used in error records emitted by the runner.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::OutOfRange { .. } => "out_of_range",
            Error::Budget { .. } => "budget",
            Error::StepCeiling { .. } => "step_ceiling",
            Error::TrialsAborted { .. } => "trials_aborted",
            Error::Applicability(_) => "applicability",
            Error::NotMixing(_) => "not_mixing",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
