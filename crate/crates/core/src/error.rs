use alloc::string::String;

/// Errors produced by the core routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{what} outside its domain: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not symplectic: defect {defect:e} exceeds tolerance {tol:e}")]
    NotSymplectic { defect: f64, tol: f64 },

    #[error("square-root iteration did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("regularization needs ||T - 1|| < 1/2, got {deviation}")]
    RegularizationDomain { deviation: f64 },

    #[error("Euler decomposition failed: {0}")]
    Decomposition(String),

    #[error("invalid Gaussian state: {0}")]
    InvalidState(String),

    #[error("photon budget exceeded: probe carries {photons} photons, budget is {budget}")]
    EnergyConstraint { photons: f64, budget: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("query planning failed: {0}")]
    Planning(String),

    #[error("bound precondition violated: {0}")]
    BoundDomain(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn dimension(detail: impl Into<String>) -> Self {
        Error::Dimension(detail.into())
    }
}
