//! Singular values by one-sided (Hestenes) Jacobi rotations.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::norms::frobenius_norm;
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;

/// Singular values of `a` in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    // Work on the orientation with at least as many rows as columns.
    let work = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.adjoint()
    };
    let (m, n) = (work.rows(), work.cols());
    let fro = frobenius_norm(&work);
    if fro == 0.0 {
        return Ok(vec![0.0; n]);
    }
    // Scale to unit Frobenius norm so squared column norms cannot overflow.
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..m).map(|i| work[(i, j)] / fro).collect())
        .collect();

    let rel_tol = (2.0 * m as f64 * f64::EPSILON).max(1e-15);
    let abs_floor = 1e-30;

    let mut converged = n < 2;
    for _sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (left, right) = cols.split_at_mut(q);
                let ap = &mut left[p];
                let aq = &mut right[0];
                let alpha: f64 = ap.iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = aq.iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = ap.iter().zip(aq.iter()).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= abs_floor || g <= rel_tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (x, y) in ap.iter_mut().zip(aq.iter_mut()) {
                    let yb = *y * phase.conj();
                    let new_x = *x * c - yb * s;
                    let new_y = *x * s + yb * c;
                    *x = new_x;
                    *y = new_y;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "one-sided Jacobi SVD",
            iterations: MAX_SWEEPS,
        });
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| fro * c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}
