use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what}[{index}] = {value} is outside [0, 1]")]
    OutOfUnitRange {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("influence row {row} sums to {sum}, expected 1")]
    NotRowStochastic { row: usize, sum: f64 },

    #[error("influence weight w[{row}][{col}] = {value} has no supporting edge {col} -> {row}")]
    OffSupport { row: usize, col: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dynamics are not guaranteed to converge: {0}")]
    NotConvergent(String),

    #[error("linear system is singular or ill-conditioned (rcond estimate {rcond:e})")]
    Singular { rcond: f64 },

    #[error("invalid attack configuration: {0}")]
    InvalidConfig(String),

    #[error("attack budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("no feasible nonempty adversary set for {n} agents (need at least 4)")]
    NoFeasibleAdversaries { n: usize },

    #[error("enumeration needs {count} configurations, cap is {cap}")]
    EnumerationCap { count: String, cap: u64 },

    #[error("variant {0} needs an external score vector")]
    MissingScores(&'static str),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Csv(_))
    }
}
