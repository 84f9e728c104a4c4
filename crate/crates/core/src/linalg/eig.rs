//! Nonsymmetric eigendecomposition: Householder reduction to Hessenberg form,
//! implicitly shifted complex QR to Schur form, and left/right eigenvectors
//! by substitution on the triangular factor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{normalize, vector_norm, ComplexMatrix, ComplexVector};
use super::norms::frobenius_norm;
use crate::error::{Error, Result};

pub const MAX_EIG_DIM: usize = 256;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const RESCALE_AT: f64 = 1e100;

/// Eigenvalue with unit-norm right and left eigenvectors.
///
/// `left` satisfies `A† L = conj(λ) L`, i.e. `L† A = λ L†`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub eigenvalue: Complex64,
    pub right: ComplexVector,
    pub left: ComplexVector,
}

impl EigenPair {
    /// `⟨L|R⟩`.
    pub fn overlap(&self) -> Complex64 {
        self.left.inner(&self.right)
    }
}

/// Complex Schur factorization `A = Z T Z†` with `T` upper triangular.
#[derive(Clone, Debug)]
pub struct Schur {
    pub t: ComplexMatrix,
    pub z: ComplexMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.t.diagonal()
    }
}

pub fn schur(a: &ComplexMatrix) -> Result<Schur> {
    let n = a.require_square("eigendecomposition")?;
    if n > MAX_EIG_DIM {
        return Err(Error::Dimension(format!(
            "eigendecomposition supports up to {MAX_EIG_DIM}x{MAX_EIG_DIM}, got {n}x{n}"
        )));
    }
    let (mut h, mut z) = hessenberg(a);
    shifted_qr(&mut h, &mut z)?;
    Ok(Schur { t: h, z })
}

pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    Ok(schur(a)?.eigenvalues())
}

/// All eigenpairs of `a`, in Schur order (with multiplicity).
///
/// Left and right vectors of the same pair come from the same Schur factor,
/// so pairing is structural. At an exact coalescence (equal diagonal entries
/// of `T` with nonzero coupling) the defective copies share their
/// eigenvector and `⟨L|R⟩` is exactly zero.
pub fn eig(a: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    let Schur { t, z } = schur(a)?;
    let n = t.rows();
    let mut pairs = Vec::with_capacity(n);
    for k in 0..n {
        let mut right = z.matvec(&right_triangular_vector(&t, k));
        let mut left = z.matvec(&left_triangular_vector(&t, k));
        normalize(&mut right);
        normalize(&mut left);
        pairs.push(EigenPair {
            eigenvalue: t[(k, k)],
            right: ComplexVector(right),
            left: ComplexVector(left),
        });
    }
    Ok(pairs)
}

fn householder_vector(x: &[Complex64]) -> Option<(Vec<Complex64>, Complex64)> {
    if x[1..].iter().all(|z| *z == ZERO) {
        return None;
    }
    let norm = vector_norm(x);
    let phase = if x[0] == ZERO { ONE } else { x[0] / x[0].norm() };
    let alpha = -phase * norm;
    let mut v = x.to_vec();
    v[0] -= alpha;
    normalize(&mut v);
    Some((v, alpha))
}

/// Returns `(H, Q)` with `A = Q H Q†`, `H` upper Hessenberg.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let Some((v, alpha)) = householder_vector(&x) else {
            continue;
        };
        // H <- (I - 2vv†) H
        for j in 0..n {
            let dot: Complex64 = (0..v.len()).map(|r| v[r].conj() * h[(k + 1 + r, j)]).sum();
            for r in 0..v.len() {
                h[(k + 1 + r, j)] -= 2.0 * v[r] * dot;
            }
        }
        // H <- H (I - 2vv†), Q <- Q (I - 2vv†)
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let dot: Complex64 = (0..v.len()).map(|r| m[(i, k + 1 + r)] * v[r]).sum();
                for r in 0..v.len() {
                    m[(i, k + 1 + r)] -= 2.0 * dot * v[r].conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G·(x, y)ᵀ = (r, 0)ᵀ`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    if y == ZERO {
        return (1.0, ZERO);
    }
    if x == ZERO {
        return (0.0, ONE);
    }
    let ax = x.norm();
    let rho = ax.hypot(y.norm());
    (ax / rho, (x / ax) * y.conj() / rho)
}

fn rotate_rows(m: &mut ComplexMatrix, k: usize, c: f64, s: Complex64, cols: std::ops::Range<usize>) {
    for j in cols {
        let a = m[(k, j)];
        let b = m[(k + 1, j)];
        m[(k, j)] = a * c + s * b;
        m[(k + 1, j)] = -s.conj() * a + b * c;
    }
}

fn rotate_cols(m: &mut ComplexMatrix, k: usize, c: f64, s: Complex64, rows: std::ops::Range<usize>) {
    for i in rows {
        let a = m[(i, k)];
        let b = m[(i, k + 1)];
        m[(i, k)] = a * c + b * s.conj();
        m[(i, k + 1)] = -a * s + b * c;
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let (l1, l2) = (half_tr + root, half_tr - root);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn shifted_qr(h: &mut ComplexMatrix, z: &mut ComplexMatrix) -> Result<()> {
    let n = h.rows();
    if n < 2 {
        return Ok(());
    }
    let norm = frobenius_norm(h);
    let max_iter = 30 * n.max(10);
    let mut total = 0;
    let mut since_deflation = 0;
    let mut hi = n - 1;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut scale = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if scale == 0.0 {
                scale = norm;
            }
            if h[(l, l - 1)].norm() <= f64::EPSILON * scale {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > max_iter {
            return Err(Error::NoConvergence {
                routine: "shifted QR",
                iterations: total,
            });
        }
        let shift = if since_deflation % 10 == 0 {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for k in l..hi {
            let (x, y) = if k == l {
                (h[(l, l)] - shift, h[(l + 1, l)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let (c, s) = givens(x, y);
            let first_col = if k == l { l } else { k - 1 };
            rotate_rows(h, k, c, s, first_col..n);
            if k > l {
                h[(k + 1, k - 1)] = ZERO;
            }
            rotate_cols(h, k, c, s, 0..(k + 3).min(hi + 1));
            rotate_cols(z, k, c, s, 0..n);
        }
    }
    Ok(())
}

/// Solves `(T − t_kk) x = 0` with `x_k = 1`, `x_j = 0` for `j > k`.
fn right_triangular_vector(t: &ComplexMatrix, k: usize) -> Vec<Complex64> {
    let n = t.rows();
    let lambda = t[(k, k)];
    let mut x = vec![ZERO; n];
    x[k] = ONE;
    for i in (0..k).rev() {
        let num: Complex64 = -(i + 1..=k).map(|j| t[(i, j)] * x[j]).sum::<Complex64>();
        let den = t[(i, i)] - lambda;
        if den == ZERO {
            if num != ZERO {
                // Exact coalescence: the eigenvector belongs to the earlier copy.
                x.fill(ZERO);
                x[i] = ONE;
            }
            continue;
        }
        x[i] = num / den;
        let mag = x[i].norm();
        if mag > RESCALE_AT {
            for v in x.iter_mut() {
                *v /= mag;
            }
        }
    }
    x
}

/// Solves `y† (T − t_kk) = 0` with `y_k = 1`, `y_j = 0` for `j < k`.
fn left_triangular_vector(t: &ComplexMatrix, k: usize) -> Vec<Complex64> {
    let n = t.rows();
    let lambda = t[(k, k)];
    let mut y = vec![ZERO; n];
    y[k] = ONE;
    for i in k + 1..n {
        let num: Complex64 = -(k..i).map(|j| t[(j, i)].conj() * y[j]).sum::<Complex64>();
        let den = (t[(i, i)] - lambda).conj();
        if den == ZERO {
            if num != ZERO {
                y.fill(ZERO);
                y[i] = ONE;
            }
            continue;
        }
        y[i] = num / den;
        let mag = y[i].norm();
        if mag > RESCALE_AT {
            for v in y.iter_mut() {
                *v /= mag;
            }
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::inner;
    use crate::linalg::random::{ginibre, seeded_rng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn residual(a: &ComplexMatrix, p: &EigenPair) -> f64 {
        let av = a.matvec(p.right.as_slice());
        let r: Vec<Complex64> = av
            .iter()
            .zip(p.right.as_slice())
            .map(|(x, v)| x - p.eigenvalue * v)
            .collect();
        vector_norm(&r)
    }

    #[test]
    fn diagonal_matrix() {
        let a = ComplexMatrix::from_real_rows(&[[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]]);
        let pairs = eig(&a).unwrap();
        for (k, p) in pairs.iter().enumerate() {
            assert_eq!(p.eigenvalue, c(k as f64 + 1.0, 0.0));
            assert_eq!(p.right.as_slice()[k], ONE);
            assert_eq!(p.left.as_slice()[k], ONE);
        }
    }

    #[test]
    fn random_matrices_satisfy_eigen_equations() {
        let mut rng = seeded_rng(21);
        for m in [2, 3, 6, 17, 40] {
            let a = ginibre(m, &mut rng);
            let fro = frobenius_norm(&a);
            let ah = a.adjoint();
            let pairs = eig(&a).unwrap();
            assert_eq!(pairs.len(), m);
            for p in &pairs {
                assert!(residual(&a, p) <= 1e-10 * fro);
                let al = ah.matvec(p.left.as_slice());
                let r: Vec<Complex64> = al
                    .iter()
                    .zip(p.left.as_slice())
                    .map(|(x, v)| x - p.eigenvalue.conj() * v)
                    .collect();
                assert!(vector_norm(&r) <= 1e-10 * fro);
                assert!((p.right.norm() - 1.0).abs() < 1e-12);
                assert!((p.left.norm() - 1.0).abs() < 1e-12);
            }
            for j in 0..m {
                for l in 0..m {
                    if j != l {
                        let o = inner(pairs[j].left.as_slice(), pairs[l].right.as_slice());
                        assert!(o.norm() <= 1e-10, "m={m} <L{j}|R{l}> = {o}");
                    }
                }
            }
        }
    }

    #[test]
    fn triangular_input_keeps_exact_diagonal() {
        let a = ComplexMatrix::from_real_rows(&[[0.3, -1.0, 0.0], [0.0, 0.1, -1.0], [0.0, 0.0, 0.1]]);
        let vals = eigenvalues(&a).unwrap();
        assert_eq!(vals, vec![c(0.3, 0.0), c(0.1, 0.0), c(0.1, 0.0)]);
    }

    #[test]
    fn exact_jordan_block_has_zero_overlap() {
        let a = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        for p in eig(&a).unwrap() {
            assert_eq!(p.overlap(), ZERO);
            assert!(residual(&a, &p) == 0.0);
        }
    }

    #[test]
    fn degenerate_diagonalizable_keeps_independent_vectors() {
        let a = ComplexMatrix::identity(3);
        let pairs = eig(&a).unwrap();
        for (k, p) in pairs.iter().enumerate() {
            assert_eq!(p.right.as_slice()[k], ONE);
            assert_eq!(p.overlap(), ONE);
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(eig(&ComplexMatrix::zeros(2, 3)).is_err());
    }
}
