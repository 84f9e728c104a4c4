//! Spectral response strength of exceptional points.

pub mod ep;
pub mod error;
pub mod experiments;
pub mod greens;
pub mod linalg;
pub mod models;
pub mod petermann;
pub mod table;

pub use error::{Error, Result};
pub use num_complex::Complex64;
