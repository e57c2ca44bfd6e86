use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("x = {0} is outside the domain [0, inf)")]
    OutOfDomain(f64),

    #[error("initial datum is not smooth; f' is unavailable")]
    NotSmooth,

    #[error("quadrature did not converge: error estimate {estimate:e} above budget {budget:e} after {subdivisions} subdivisions")]
    NoConvergence {
        estimate: f64,
        budget: f64,
        subdivisions: usize,
    },

    #[error("explicit time stepping is unstable: dt = {dt:e} exceeds bound {bound:e}")]
    StabilityViolation { dt: f64, bound: f64 },

    #[error("singular tridiagonal system at row {0}")]
    SingularSystem(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the inputs rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidPoint(_)
                | Error::OutOfDomain(_)
                | Error::NotSmooth
                | Error::InvalidGrid(_)
                | Error::InvalidArgument(_)
                | Error::Parse(_)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Csv(_))
    }
}
