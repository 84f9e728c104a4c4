//! Circular contours and trapezoidal quadrature of Green's-function moments.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{invert, ComplexMatrix};

pub const DEFAULT_START_NODES: usize = 64;
pub const DEFAULT_MAX_NODES: usize = 4096;
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-13;
pub const MIN_NODES: usize = 16;
/// Nodes evaluated per parallel task.
const BLOCK: usize = 64;

/// Circle `|E − center| = radius` sampled at `nodes` equispaced points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub center: Complex64,
    pub radius: f64,
    pub nodes: usize,
}

impl Contour {
    pub fn new(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        let c = Self { center, radius, nodes };
        c.validate_shape()?;
        Ok(c)
    }

    pub fn with_radius(self, radius: f64) -> Result<Self> {
        Self::new(self.center, radius, self.nodes)
    }

    pub fn with_nodes(self, nodes: usize) -> Result<Self> {
        Self::new(self.center, self.radius, nodes)
    }

    fn validate_shape(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::Contour(format!("radius must be positive, got {}", self.radius)));
        }
        if !self.center.re.is_finite() || !self.center.im.is_finite() {
            return Err(Error::Contour("center must be finite".into()));
        }
        if !self.nodes.is_power_of_two() || self.nodes < MIN_NODES {
            return Err(Error::Contour(format!(
                "node count must be a power of two >= {MIN_NODES}, got {}",
                self.nodes
            )));
        }
        Ok(())
    }

    pub fn encloses(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }

    /// Checks that exactly `multiplicity` of `eigenvalues` lie strictly inside.
    pub fn validate(&self, eigenvalues: &[Complex64], multiplicity: usize) -> Result<()> {
        self.validate_shape()?;
        let inside = eigenvalues.iter().filter(|z| self.encloses(**z)).count();
        if inside != multiplicity {
            return Err(Error::Contour(format!(
                "circle of radius {:e} around {} encloses {inside} eigenvalues, expected {multiplicity}",
                self.radius, self.center
            )));
        }
        Ok(())
    }
}

/// Controls node doubling in the residue quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidueOptions {
    pub max_nodes: usize,
    /// Relative change in ξ between successive doublings that counts as converged.
    pub tolerance: f64,
    /// Re-center on `tr(M₁)/tr(M₀)` before forming `W`.
    pub refine_center: bool,
}

impl Default for ResidueOptions {
    fn default() -> Self {
        Self {
            max_nodes: DEFAULT_MAX_NODES,
            tolerance: DEFAULT_QUADRATURE_TOL,
            refine_center: true,
        }
    }
}

/// Moments `M_j = (1/2πi)∮ (E − c)^j G(E) dE`, `j = 0 … count−1`.
#[derive(Clone, Debug)]
pub(crate) struct Moments {
    pub moments: Vec<ComplexMatrix>,
    pub nodes: usize,
    pub converged: bool,
}

/// Sum over the listed nodes `k` (of `n` total) of `u_k^{j+1} G(c + r u_k)`,
/// in fixed-size blocks combined by a fixed pairwise tree.
fn node_sum(
    shifted: &ComplexMatrix,
    radius: f64,
    count: usize,
    nodes: &[usize],
    n: usize,
) -> Result<Vec<ComplexMatrix>> {
    let m = shifted.rows();
    let cis = |idx: usize| Complex64::from_polar(1.0, TAU * (idx as f64 / n as f64));
    let blocks: Vec<Vec<ComplexMatrix>> = nodes
        .par_chunks(BLOCK)
        .map(|chunk| -> Result<Vec<ComplexMatrix>> {
            let mut acc = vec![ComplexMatrix::zeros(m, m); count];
            for &k in chunk {
                let z = cis(k) * radius;
                let g = invert(&shifted.shifted(z).scale_real(-1.0))?;
                for (j, slot) in acc.iter_mut().enumerate() {
                    slot.axpy(cis(((j + 1) * k) % n), &g);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(pairwise(blocks))
}

fn pairwise(mut parts: Vec<Vec<ComplexMatrix>>) -> Vec<ComplexMatrix> {
    if parts.len() == 1 {
        return parts.pop().unwrap();
    }
    let right = parts.split_off(parts.len() / 2);
    let mut left = pairwise(parts);
    add_into(&mut left, &pairwise(right));
    left
}

fn add_into(acc: &mut [ComplexMatrix], other: &[ComplexMatrix]) {
    for (a, b) in acc.iter_mut().zip(other) {
        a.axpy(Complex64::new(1.0, 0.0), b);
    }
}

fn finish(sum: &[ComplexMatrix], radius: f64, n: usize) -> Vec<ComplexMatrix> {
    sum.iter()
        .enumerate()
        .map(|(j, s)| s.scale_real(radius.powi(j as i32 + 1) / n as f64))
        .collect()
}

/// Trapezoidal moments, doubling the node count until `estimate` changes by
/// less than `options.tolerance` relative, or `options.max_nodes` is reached.
pub(crate) fn adaptive_moments(
    h0: &ComplexMatrix,
    contour: &Contour,
    count: usize,
    options: &ResidueOptions,
    estimate: impl Fn(&[ComplexMatrix]) -> Result<f64>,
) -> Result<Moments> {
    contour.validate_shape()?;
    if contour.nodes > options.max_nodes {
        return Err(Error::Contour(format!(
            "starting node count {} exceeds the cap {}",
            contour.nodes, options.max_nodes
        )));
    }
    let shifted = h0.shifted(contour.center);
    let r = contour.radius;
    let mut n = contour.nodes;
    let all: Vec<usize> = (0..n).collect();
    let mut sum = node_sum(&shifted, r, count, &all, n)?;
    let mut moments = finish(&sum, r, n);
    let mut value = estimate(&moments)?;
    let mut converged = false;
    while 2 * n <= options.max_nodes {
        let odd: Vec<usize> = (0..n).map(|i| 2 * i + 1).collect();
        let extra = node_sum(&shifted, r, count, &odd, 2 * n)?;
        add_into(&mut sum, &extra);
        n *= 2;
        moments = finish(&sum, r, n);
        let next = estimate(&moments)?;
        let change = (next - value).abs();
        value = next;
        if change <= options.tolerance * next.abs() || (next == 0.0 && change == 0.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("contour quadrature did not converge with {n} nodes");
    }
    Ok(Moments {
        moments,
        nodes: n,
        converged,
    })
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Moments about `c + δ` from moments about `c`:
/// `M'_k = Σ_j C(k, j) (−δ)^{k−j} M_j`.
pub(crate) fn recenter(moments: &[ComplexMatrix], delta: Complex64) -> Vec<ComplexMatrix> {
    if delta == Complex64::new(0.0, 0.0) {
        return moments.to_vec();
    }
    let m = moments[0].rows();
    (0..moments.len())
        .map(|k| {
            let mut acc = ComplexMatrix::zeros(m, m);
            for (j, mj) in moments.iter().enumerate().take(k + 1) {
                let coeff = (-delta).powu((k - j) as u32) * binomial(k, j);
                acc.axpy(coeff, mj);
            }
            acc
        })
        .collect()
}

/// Centroid correction `δ = tr(M₁)/tr(M₀)`.
pub(crate) fn centroid_shift(moments: &[ComplexMatrix]) -> Result<Complex64> {
    let t0 = moments[0].trace();
    if t0.norm() < 0.5 {
        return Err(Error::Contour(format!("projector trace {t0} does not count any eigenvalue")));
    }
    Ok(moments.get(1).map_or(Complex64::new(0.0, 0.0), |m1| m1.trace() / t0))
}
