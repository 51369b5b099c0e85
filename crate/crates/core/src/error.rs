use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate body: {0}")]
    DegenerateBody(String),

    #[error("center is not in the interior of the body")]
    CenterOutside,

    #[error("solver failed: {message} (best residual {residual:e})")]
    SolverFail {
        message: String,
        best: Vec<f64>,
        residual: f64,
    },

    #[error("hypothesis violated: {0}")]
    HypothesisFail(String),

    #[error("kernel integral diverges: {0}")]
    DivergentKernel(String),

    #[error("quadrature did not reach tolerance (estimate {estimate:e}, error {error:e})")]
    QuadFail { estimate: f64, error: f64 },

    #[error("empty domain: {0}")]
    EmptyDomain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// Input errors are caller mistakes; everything else is a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DegenerateBody(_)
                | Error::CenterOutside
                | Error::HypothesisFail(_)
                | Error::DivergentKernel(_)
                | Error::EmptyDomain(_)
                | Error::DimensionMismatch { .. }
                | Error::InvalidInput(_)
                | Error::Unsupported(_)
        )
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
