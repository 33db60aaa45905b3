use thiserror::Error;

/// Errors produced by instance handling, the LP engine and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or invalid instance input. `path` points at the offending field.
    #[error("{msg} at {path}")]
    Parse { path: String, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The edge set handed to `evaluate` is not a path / spanning tree.
    #[error("infeasible edge set ({reason}); witness edges {witness:?}")]
    InfeasibleSet { reason: String, witness: Vec<usize> },

    /// No value of the bound makes the relaxation feasible.
    #[error("no feasible bound: {0}")]
    NoFeasibleL(String),

    #[error("cutting-plane loop exceeded its cap of {cap} cuts")]
    CutCap { cap: usize },

    #[error("simplex exceeded its iteration limit of {0}")]
    IterationLimit(usize),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("parameter out of range: {0}")]
    Range(String),

    /// Exhaustive enumeration would exceed the configured limit; no answer is given.
    #[error("enumeration limit of {limit} exceeded")]
    LimitExceeded { limit: u64 },

    #[error("round cap of {cap} exceeded")]
    RoundCap { cap: usize },

    /// Randomized rounding produced a disconnected graph on every attempt.
    #[error("randomized rounding failed: disconnected after {attempts} attempt(s)")]
    Disconnected { attempts: usize },

    #[error("arithmetic overflow in exact cost computation")]
    Overflow,

    /// An internal invariant did not hold; indicates a bug or numerical breakdown.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
