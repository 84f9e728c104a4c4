use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Pivots with modulus below this are treated as exact zeros.
pub const SINGULAR_PIVOT: f64 = 1e-300;
/// 1-norm condition estimates above this are logged.
pub const CONDITION_WARNING: f64 = 1e14;

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.require_square("LU factorization")?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pivot_row, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot < SINGULAR_PIVOT {
                return Err(Error::Singular { pivot, column: k });
            }
            if pivot_row != k {
                perm.swap(k, pivot_row);
                let data = lu.as_mut_slice();
                for j in 0..n {
                    data.swap(k * n + j, pivot_row * n + j);
                }
            }
            let diag = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / diag;
                lu[(i, k)] = factor;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.rows();
        assert_eq!(rhs.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.lu.rows();
        let mut inv = ComplexMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e.fill(Complex64::new(0.0, 0.0));
            e[j] = Complex64::new(1.0, 0.0);
            for (i, v) in self.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

/// Matrix inverse via partially pivoted LU.
pub fn invert(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let lu = Lu::factor(a)?;
    let inv = lu.inverse();
    if !inv.is_finite() {
        return Err(Error::Singular {
            pivot: lu.lu.diagonal().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min),
            column: 0,
        });
    }
    if log::log_enabled!(log::Level::Warn) {
        let cond = one_norm(a) * one_norm(&inv);
        if cond > CONDITION_WARNING {
            log::warn!("inverting a matrix with 1-norm condition estimate {cond:.3e}");
        }
    }
    Ok(inv)
}

fn one_norm(a: &ComplexMatrix) -> f64 {
    (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
