use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("evaluation at the excluded pole of the sphere")]
    Pole,
    #[error("divergent integral: {0}")]
    Divergence(String),
    #[error("degenerate sample set: {0}")]
    Sampling(String),
    #[error("structural mismatch: {0}")]
    StructuralMismatch(String),
    #[error("quadrature accuracy not reached: {0}")]
    Accuracy(String),
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
    #[error("decay fit failed: {0}")]
    Fit(String),
    #[error("check `{check}` failed to run: {source}")]
    Check {
        check: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps an error with the name of the check that produced it.
    pub fn in_check(self, check: &str) -> Self {
        Error::Check {
            check: check.to_string(),
            source: Box::new(self),
        }
    }

    /// True for failures caused by non-convergence or lost accuracy, as opposed
    /// to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Accuracy(_) | Error::NonConvergence(_) => true,
            Error::Check { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// True for errors showing that a checked identity is false rather than
    /// that the computation broke.
    pub fn is_falsifying(&self) -> bool {
        match self {
            Error::StructuralMismatch(_) | Error::Divergence(_) | Error::Fit(_) => true,
            Error::Check { source, .. } => source.is_falsifying(),
            _ => false,
        }
    }

    /// True for configuration and parameter errors.
    pub fn is_configuration(&self) -> bool {
        match self {
            Error::InvalidParams(_) | Error::Domain(_) => true,
            Error::Check { source, .. } => source.is_configuration(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
