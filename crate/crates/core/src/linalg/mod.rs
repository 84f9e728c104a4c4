//! Dense complex linear algebra.

pub mod eig;
pub mod lu;
pub mod matrix;
pub mod norms;
pub mod random;
pub mod svd;

pub use eig::{eig, eigenvalues, schur, EigenPair, Schur};
pub use lu::{invert, Lu};
pub use matrix::{inner, vector_norm, ComplexMatrix, ComplexVector};
pub use norms::{frobenius_norm, spectral_norm};
pub use svd::singular_values;
