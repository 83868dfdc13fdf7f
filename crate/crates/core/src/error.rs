use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the numerical laboratory.
#[derive(Error, Debug)]
pub enum Error {
    #[error("domain error at x = ({0}, {1}, {2}): {3}")]
    Domain(f64, f64, f64, String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Born series divergent: kappa*C/(4 pi) = {margin} >= 1")]
    DivergentBornSeries { margin: f64 },

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("eigensolver did not converge: {0}")]
    EigenFailure(String),

    #[error("positivity violated: {0}")]
    PositivityViolated(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("effective sample size {ess:.1} below floor {floor:.1}")]
    EssBelowFloor { ess: f64, floor: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
