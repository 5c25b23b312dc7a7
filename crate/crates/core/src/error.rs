use thiserror::Error;

/// Errors raised across the library. Scalar payloads are widened to `f64`
/// so the type stays independent of the working precision.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("problem `{0}` has no solution-set descriptor")]
    NoDescriptor(String),

    #[error("problem `{0}` has no {1} objective")]
    MissingObjective(String, &'static str),

    #[error("problem `{0}` has neither a closed-form hyper-objective nor a descriptor")]
    NoOracle(String),

    #[error("descriptor does not support {0}")]
    Unsupported(&'static str),

    #[error("evaluation budget of {budget} exhausted; best value {best_value} with certified gap {achieved_tol}")]
    BudgetExceeded { budget: usize, best_value: f64, achieved_tol: f64 },

    #[error("inner problem is unbounded on the truncated parametrization (|t| ≤ {bound})")]
    UnboundedInner { bound: f64 },

    #[error("prox minimizer sits on the search bracket boundary (radius {radius})")]
    BracketTooSmall { radius: f64 },

    #[error("midpoint is not in the middle fiber (distance {distance})")]
    InfeasibleMidpoint { distance: f64 },

    #[error("no feasible witness: {0}")]
    NoWitness(String),

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, got })
    }
}
