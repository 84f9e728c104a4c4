use super::matrix::{vector_norm, ComplexMatrix};
use super::svd::singular_values;
use crate::error::Result;

/// `sqrt(Σ |a_ij|²)`, evaluated with scaling so large entries do not overflow.
pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    vector_norm(a.as_slice())
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?[0])
}
