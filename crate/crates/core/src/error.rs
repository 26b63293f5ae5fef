use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The same event name carries different controllability/observability
    /// attributes in two places of one problem instance.
    #[error("event `{0}` has inconsistent controllable/observable attributes")]
    AttributeInconsistency(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("unknown event `{0}`")]
    UnknownEvent(String),

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("state ceiling of {limit} states exceeded")]
    StateLimit { limit: usize },

    #[error("iteration ceiling of {limit} iterations exceeded")]
    IterationLimit { limit: usize },

    #[error("pipeline step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    /// A post-hoc self check failed. Always a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("io error on `{path}`: {message}")]
    Io { path: String, message: String },

    #[error("malformed json in `{path}` at line {line}, column {column}: {message}")]
    Json {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    /// True for the resource ceilings (state count, iteration count).
    pub fn is_resource(&self) -> bool {
        match self {
            Error::StateLimit { .. } | Error::IterationLimit { .. } => true,
            Error::Step { source, .. } => source.is_resource(),
            _ => false,
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Error {
        match self {
            e @ Error::Step { .. } => e,
            e => Error::Step {
                step,
                source: Box::new(e),
            },
        }
    }
}
