use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("matrix is singular to working precision (pivot modulus {pivot:e} at column {column})")]
    Singular { pivot: f64, column: usize },

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence { routine: &'static str, iterations: usize },

    #[error("not an exceptional point: {0}")]
    NotAnEp(String),

    #[error(
        "order of the cluster at {eigenvalue} is numerically ambiguous \
         (singular value {sigma:e} within a decade of threshold {threshold:e}); declare the order explicitly"
    )]
    AmbiguousOrder {
        eigenvalue: Complex64,
        sigma: f64,
        threshold: f64,
    },

    #[error("invalid contour: {0}")]
    Contour(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("search window does not bracket a merge: {0}")]
    Bracketing(String),

    #[error("vanishing left/right overlap {overlap:e}: eigenstate is defective")]
    AtEp { overlap: f64 },

    #[error("perturbed cluster members cannot be separated from foreign eigenvalues: {0}")]
    Separation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::NoConvergence { .. }
                | Error::NotAnEp(_)
                | Error::AmbiguousOrder { .. }
                | Error::Contour(_)
                | Error::Bracketing(_)
                | Error::AtEp { .. }
                | Error::Separation(_)
        )
    }
}
