//! Error type shared by the whole crate.

/// Crate-wide error enum. Numerical routines keep the failing abscissa or a
/// short description so reports can name the offending input.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite input in {0}")]
    NonFiniteInput(String),

    #[error("integrand returned a non-finite value at abscissa {abscissa}")]
    NonFiniteSample { abscissa: f64 },

    #[error("evaluation budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("inner polar maximization did not converge (ill-conditioned norm?)")]
    PolarNonConvergence,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("norm failed validation: {0}")]
    InvalidNorm(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("configuration errors:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
