use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input rejected by a precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A construction produced parameters outside the admissible corridor
    /// (q_n > alpha_n, q_n < 1, ansatz failure, ...).
    #[error("constraint violated at stage {stage}: {detail}")]
    Constraint { stage: usize, detail: String },

    #[error("no convergence after {iterations} sweeps (relative gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },

    /// A quantity exists mathematically but cannot be represented as an `f64`.
    #[error("value outside floating-point range: {0}")]
    OutOfRange(String),

    #[error("degenerate differential at {re}+{im}i (jacobian {jacobian:e})")]
    Degenerate { re: f64, im: f64, jacobian: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn constraint(stage: usize, detail: impl Into<String>) -> Self {
        Error::Constraint {
            stage,
            detail: detail.into(),
        }
    }

    /// Short machine-readable tag used in CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "invalid_input",
            Error::Constraint { .. } => "constraint_violation",
            Error::NonConvergence { .. } => "non_convergence",
            Error::OutOfRange(_) => "out_of_range",
            Error::Degenerate { .. } => "degenerate",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
