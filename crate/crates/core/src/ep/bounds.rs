//! Splitting and passivity bounds in terms of ξ.

use serde::Serialize;

use super::residue::EpReport;
use crate::error::Result;
use crate::linalg::{frobenius_norm, ComplexMatrix};
use crate::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PassiveBound {
    pub bound: f64,
    pub satisfied: bool,
}

/// `(√(2n) |Im λ|)^{n−1}`.
pub fn passive_bound(lambda_ep: Complex64, n: usize) -> f64 {
    ((2.0 * n as f64).sqrt() * lambda_ep.im.abs()).powi(n as i32 - 1)
}

/// Evaluates the passive-system bound for `report`; whether the system is
/// passive is the caller's concern.
pub fn passive_bound_check(report: &EpReport, n: usize) -> PassiveBound {
    let bound = passive_bound(report.eigenvalue, n);
    PassiveBound {
        bound,
        satisfied: report.strength <= bound,
    }
}

/// Radius `(ε ‖H₁‖₂ ξ)^{1/n}` bounding the eigenvalue displacement.
pub fn splitting_bound(xi: f64, n: usize, epsilon: f64, h1_norm: f64) -> f64 {
    (epsilon * h1_norm * xi).powf(1.0 / n as f64)
}

/// `‖W H₁ W‖_F / (‖W‖_F² ‖H₁‖_F)`; zero for a perturbation that does not
/// produce the full `n`th-root splitting.
pub fn perturbation_genericity(w: &ComplexMatrix, h1: &ComplexMatrix) -> Result<f64> {
    let whw = w.matmul(h1).matmul(w);
    let denom = frobenius_norm(w).powi(2) * frobenius_norm(h1);
    Ok(if denom > 0.0 { frobenius_norm(&whw) / denom } else { 0.0 })
}
