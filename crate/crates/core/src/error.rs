use thiserror::Error;

/// Errors raised by the evaluators, the optimizer and the diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid digit word: {0}")]
    InvalidWord(String),

    #[error("point {0} is outside the open unit interval")]
    OutOfDomain(f64),

    #[error("invalid probability vector: {0}")]
    InvalidWeights(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "cylinder enumeration needs {words:.3e} words at depth {depth}, budget is {budget:.0e}; use the operator method"
    )]
    BudgetExceeded {
        words: f64,
        depth: usize,
        budget: f64,
    },

    #[error("{what} did not converge after {iterations} iterations (last spread {spread:.3e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        spread: f64,
    },

    #[error("gradient undefined at boundary: {0}")]
    Boundary(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
