use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid structure: {0}")]
    Structure(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("inner solve did not converge at atom {atom} after {iterations} iterations (residual {residual:e})")]
    InnerNonConvergence {
        atom: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("theory check `{inequality}` violated at iteration {iteration}: lhs {lhs:e} < rhs {rhs:e}")]
    TheoryViolation {
        inequality: &'static str,
        iteration: usize,
        lhs: f64,
        rhs: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
