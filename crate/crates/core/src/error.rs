use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("did not converge: {0}")]
    Convergence(String),
    #[error("no admissible degree up to {max_search}; tail there is {tail:.3e}")]
    DegreeNotFound { max_search: usize, tail: f64 },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("estimation cannot resolve tolerance {tau:.3e}: standard error {std_error:.3e}")]
    Resolution { tau: f64, std_error: f64 },
    #[error("infeasible: required tolerance {required_tau:.3e} is below the floor {floor:.3e}")]
    Infeasible { required_tau: f64, floor: f64 },
    #[error("class too large for exhaustive search: {size} members (limit {limit})")]
    ClassTooLarge { size: usize, limit: usize },
    #[error("base learner failed at iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("usage: {0}")]
    Usage(String),
    #[error("csv schema mismatch: {0}")]
    Schema(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
