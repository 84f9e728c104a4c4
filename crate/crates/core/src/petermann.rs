//! Petermann factors, rank-1 spectral projectors of isolated states, and the
//! regularized Petermann estimate of ξ.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::random::{ginibre, seeded_rng, EpRng};
use crate::linalg::{eig, spectral_norm, ComplexMatrix, EigenPair};

/// Overlaps `|⟨L|R⟩|` at or below this mark a defective state.
pub const MIN_OVERLAP: f64 = 1e-300;
/// Fig. 5 regularization strength.
pub const DEFAULT_ETA: f64 = 1e-21;

/// `K = ⟨R|R⟩⟨L|L⟩ / |⟨L|R⟩|²`.
pub fn petermann_factor(pair: &EigenPair) -> Result<f64> {
    let overlap = pair.overlap().norm();
    if overlap <= MIN_OVERLAP {
        return Err(Error::AtEp { overlap });
    }
    let (r, l) = (pair.right.norm(), pair.left.norm());
    Ok((r * l / overlap).powi(2))
}

/// `P = |R⟩⟨L| / ⟨L|R⟩`.
pub fn projector_of_state(pair: &EigenPair) -> Result<ComplexMatrix> {
    let overlap = pair.overlap();
    if overlap.norm() <= MIN_OVERLAP {
        return Err(Error::AtEp { overlap: overlap.norm() });
    }
    Ok(ComplexMatrix::outer(pair.right.as_slice(), pair.left.as_slice()).scale(1.0 / overlap))
}

/// Eigenvalue displacement bound `ε ‖H₁‖₂ √K` for an isolated state.
pub fn bauer_fike_bound(k_factor: f64, epsilon: f64, h1_norm: f64) -> f64 {
    epsilon * h1_norm * k_factor.sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct PetermannRecord {
    pub eigen: EigenPair,
    pub factor: f64,
    pub projector_norm: f64,
}

impl PetermannRecord {
    pub fn new(eigen: EigenPair) -> Result<Self> {
        let factor = petermann_factor(&eigen)?;
        let projector_norm = spectral_norm(&projector_of_state(&eigen)?)?;
        Ok(Self {
            eigen,
            factor,
            projector_norm,
        })
    }
}

/// One record per eigenpair of `h0`.
pub fn petermann_records(h0: &ComplexMatrix) -> Result<Vec<PetermannRecord>> {
    eig(h0)?.into_iter().map(PetermannRecord::new).collect()
}

/// CSV with header `eigen_re,eigen_im,K,proj_norm`.
pub fn records_to_csv(records: &[PetermannRecord]) -> String {
    let mut out = String::from("eigen_re,eigen_im,K,proj_norm\n");
    for r in records {
        let z = r.eigen.eigenvalue;
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", z.re, z.im, r.factor, r.projector_norm).unwrap();
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct PetermannEstimate {
    /// Estimate from the perturbed state nearest `λ`.
    pub xi: f64,
    /// Mean of the member estimates. Symmetric combinations cancel the
    /// leading-order error in the perturbation, so this is not a fair
    /// stand-in for the single-state relation.
    pub mean: f64,
    /// `n |E_l − λ|^{n−1} √K_l` for each perturbed state, nearest first.
    pub members: Vec<f64>,
    pub eta: f64,
    pub seed: Option<u64>,
}

/// Estimates ξ from the Petermann factors of `H₀ + η R`, `R` a Ginibre
/// matrix of unit spectral norm drawn from `seed`.
pub fn xi_via_petermann(h0: &ComplexMatrix, lambda_ep: Complex64, n: usize, eta: f64, seed: u64) -> Result<PetermannEstimate> {
    let mut est = xi_via_petermann_with(h0, lambda_ep, n, eta, &mut seeded_rng(seed))?;
    est.seed = Some(seed);
    Ok(est)
}

pub fn xi_via_petermann_with(
    h0: &ComplexMatrix,
    lambda_ep: Complex64,
    n: usize,
    eta: f64,
    rng: &mut EpRng,
) -> Result<PetermannEstimate> {
    let m = h0.require_square("xi_via_petermann")?;
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("η must be nonnegative, got {eta}")));
    }
    if n == 0 || n > m {
        return Err(Error::Domain(format!("order {n} does not fit a {m}x{m} matrix")));
    }
    let noise = ginibre(m, rng);
    let noise = noise.scale_real(eta / spectral_norm(&noise)?);
    let perturbed = h0 + &noise;
    let mut pairs = eig(&perturbed)?;
    let dist = |p: &EigenPair| (p.eigenvalue - lambda_ep).norm();
    pairs.sort_by(|a, b| dist(a).total_cmp(&dist(b)));
    if let Some(next) = pairs.get(n) {
        let (inner, outer) = (dist(&pairs[n - 1]), dist(next));
        if outer <= 2.0 * inner {
            return Err(Error::Separation(format!(
                "member {n} at distance {inner:e} but the next eigenvalue at {outer:e}"
            )));
        }
    }
    let members = pairs[..n]
        .iter()
        .map(|p| Ok(n as f64 * dist(p).powi(n as i32 - 1) * petermann_factor(p)?.sqrt()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PetermannEstimate {
        xi: members[0],
        mean: members.iter().sum::<f64>() / n as f64,
        members,
        eta,
        seed: None,
    })
}
