use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0}: only d in {{1, 2, 3}} is supported")]
    UnsupportedDimension(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-uniform grid along axis {axis}: spacing deviates by {deviation:e}")]
    NonUniformGrid { axis: usize, deviation: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("point {point:?} lies outside the region where the field is evaluable")]
    OutOfDomain { point: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The quadrature does not resolve the oscillation it is asked to integrate.
    #[error("under-resolved quadrature: {context} needs at least {required} polar nodes, got {available}")]
    UnderResolved {
        context: String,
        required: usize,
        available: usize,
    },

    #[error("quadrature pole is not aligned with the stationary point (pole . kappa = {alignment})")]
    MisalignedQuadrature { alignment: f64 },

    #[error("outside theorem scope: {0}")]
    TheoremScope(String),

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config { line: usize, key: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnderResolved { .. } | Error::MisalignedQuadrature { .. } => 3,
            Error::Io(_) | Error::QuadratureFailure(_) => 1,
            _ => 2,
        }
    }
}
