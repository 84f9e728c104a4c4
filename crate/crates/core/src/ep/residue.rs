//! Spectral response strength `ξ = ‖W‖`, `W = N^{n−1}`, by the nilpotent power
//! (when `H₀` is the EP block itself) and by residue quadrature of `G(E)`.

use num_complex::Complex64;
use serde::Serialize;

use super::cluster::{SpectralCluster, Spectrum};
use super::contour::{adaptive_moments, centroid_shift, recenter, Contour, ResidueOptions};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, frobenius_norm, invert, singular_values, ComplexMatrix};

/// `σ₂/σ₁` of `W` below which `W` counts as rank 1.
pub const RANK1_TOLERANCE: f64 = 1e-8;
/// Relative size of `N^n` tolerated by [`xi_special`].
pub const NILPOTENCY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct EpReport {
    pub cluster: SpectralCluster,
    /// `λ_EP` after centroid refinement.
    pub eigenvalue: Complex64,
    pub contour: Option<Contour>,
    pub w_operator: ComplexMatrix,
    pub strength: f64,
    pub rank1_residual: f64,
    pub quadrature_nodes_used: usize,
    pub converged: bool,
}

#[derive(Serialize)]
struct EpReportJson<'a> {
    eigenvalue: [f64; 2],
    order: usize,
    xi: f64,
    rank1_residual: f64,
    nodes: usize,
    converged: bool,
    #[serde(rename = "W")]
    w: &'a ComplexMatrix,
}

impl EpReport {
    fn from_w(
        cluster: SpectralCluster,
        eigenvalue: Complex64,
        contour: Option<Contour>,
        w: ComplexMatrix,
        nodes: usize,
        quadrature_converged: bool,
    ) -> Result<Self> {
        let sv = singular_values(&w)?;
        let top = sv.first().copied().unwrap_or(0.0);
        let rank1_residual = if top > 0.0 { sv.get(1).copied().unwrap_or(0.0) / top } else { 0.0 };
        let strength = if rank1_residual <= RANK1_TOLERANCE { frobenius_norm(&w) } else { top };
        let converged = quadrature_converged
            && (rank1_residual <= RANK1_TOLERANCE || cluster.algebraic_multiplicity > cluster.order);
        Ok(Self {
            cluster,
            eigenvalue,
            contour,
            w_operator: w,
            strength,
            rank1_residual,
            quadrature_nodes_used: nodes,
            converged,
        })
    }

    pub fn order(&self) -> usize {
        self.cluster.order
    }

    /// `{"eigenvalue", "order", "xi", "rank1_residual", "nodes", "converged", "W"}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(EpReportJson {
            eigenvalue: [self.eigenvalue.re, self.eigenvalue.im],
            order: self.cluster.order,
            xi: self.strength,
            rank1_residual: self.rank1_residual,
            nodes: self.quadrature_nodes_used,
            converged: self.converged,
            w: &self.w_operator,
        })
        .expect("report serializes")
    }
}

/// `W = N^{n−1}` with `N = H₀ − λ𝟙`, for `H₀` of size exactly `n`.
pub fn xi_special(h0: &ComplexMatrix, lambda_ep: Complex64, n: usize) -> Result<EpReport> {
    let m = h0.require_square("xi_special")?;
    if n == 0 || m != n {
        return Err(Error::Dimension(format!(
            "the nilpotent formula needs an {n}x{n} matrix, got {m}x{m}; use xi_residue"
        )));
    }
    let nil = h0.shifted(lambda_ep);
    let n_norm = frobenius_norm(&nil);
    let w = nil.pow(n as u32 - 1);
    let top = nil.matmul(&w);
    let top_norm = frobenius_norm(&top);
    if top_norm > NILPOTENCY_TOLERANCE * n_norm.powi(n as i32) {
        return Err(Error::NotAnEp(format!(
            "‖N^{n}‖_F = {top_norm:e} is not negligible against ‖N‖_F^{n} = {:e}",
            n_norm.powi(n as i32)
        )));
    }
    let w_norm = frobenius_norm(&w);
    if w_norm <= 1e-8 * n_norm.powi(n as i32 - 1) {
        return Err(Error::NotAnEp(format!(
            "N^{} vanishes: the nilpotency index is below {n}",
            n - 1
        )));
    }
    let cluster = SpectralCluster {
        eigenvalue: lambda_ep,
        algebraic_multiplicity: n,
        order: n,
        member_indices: (0..n).collect(),
    };
    EpReport::from_w(cluster, lambda_ep, None, w, 0, true)
}

/// Moments up to `count − 1` about the (optionally refined) cluster centre.
fn centred_moments(
    h0: &ComplexMatrix,
    contour: &Contour,
    count: usize,
    options: &ResidueOptions,
    estimate: impl Fn(&[ComplexMatrix]) -> Result<f64>,
) -> Result<(Vec<ComplexMatrix>, Complex64, usize, bool)> {
    let refine = options.refine_center;
    let centre = |ms: &[ComplexMatrix]| -> Result<(Vec<ComplexMatrix>, Complex64)> {
        if refine {
            let delta = centroid_shift(ms)?;
            Ok((recenter(ms, delta), contour.center + delta))
        } else {
            Ok((ms.to_vec(), contour.center))
        }
    };
    let needed = if refine { count.max(2) } else { count };
    let quad = adaptive_moments(h0, contour, needed, options, |ms| estimate(&centre(ms)?.0))?;
    let (mut powers, lambda) = centre(&quad.moments)?;
    powers.truncate(count);
    Ok((powers, lambda, quad.nodes, quad.converged))
}

/// `W = (1/2πi)∮ (E − λ)^{n−1} G(E) dE` by adaptive trapezoidal quadrature.
///
/// For order-1 clusters `W` is the spectral projector.
pub fn xi_residue(
    h0: &ComplexMatrix,
    cluster: &SpectralCluster,
    contour: &Contour,
    options: &ResidueOptions,
) -> Result<EpReport> {
    h0.require_square("xi_residue")?;
    contour.validate(&eigenvalues(h0)?, cluster.algebraic_multiplicity)?;
    let n = cluster.order;
    let (powers, lambda, nodes, converged) =
        centred_moments(h0, contour, n, options, |ps| Ok(frobenius_norm(&ps[n - 1])))?;
    let w = powers.into_iter().nth(n - 1).unwrap();
    EpReport::from_w(cluster.clone(), lambda, Some(*contour), w, nodes, converged)
}

/// [`xi_residue`] on the cluster's default contour.
pub fn xi_residue_default(
    h0: &ComplexMatrix,
    spectrum: &Spectrum,
    cluster: &SpectralCluster,
    options: &ResidueOptions,
) -> Result<EpReport> {
    let contour = spectrum.default_contour(h0, cluster)?;
    xi_residue(h0, cluster, &contour, options)
}

/// `P_l` and `N_l^k`, `k = 1 … n_l − 1`, for one cluster.
#[derive(Clone, Debug, Serialize)]
pub struct ClusterTerms {
    pub cluster: SpectralCluster,
    pub eigenvalue: Complex64,
    pub projector: ComplexMatrix,
    pub nilpotent_powers: Vec<ComplexMatrix>,
    pub converged: bool,
}

/// `G(E) = Σ_l [P_l/(E − λ_l) + Σ_{k≥2} N_l^{k−1}/(E − λ_l)^k]`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralDecomposition {
    pub terms: Vec<ClusterTerms>,
}

impl SpectralDecomposition {
    pub fn reconstruct_greens(&self, energy: Complex64) -> ComplexMatrix {
        let m = self.terms[0].projector.rows();
        let mut g = ComplexMatrix::zeros(m, m);
        for t in &self.terms {
            let inv = 1.0 / (energy - t.eigenvalue);
            g.axpy(inv, &t.projector);
            let mut factor = inv;
            for nk in &t.nilpotent_powers {
                factor *= inv;
                g.axpy(factor, nk);
            }
        }
        g
    }

    pub fn projector_sum(&self) -> ComplexMatrix {
        let m = self.terms[0].projector.rows();
        let mut s = ComplexMatrix::zeros(m, m);
        for t in &self.terms {
            s.axpy(Complex64::new(1.0, 0.0), &t.projector);
        }
        s
    }
}

pub fn spectral_decomposition_with(
    h0: &ComplexMatrix,
    clusters: &[SpectralCluster],
    contours: &[Contour],
    options: &ResidueOptions,
) -> Result<SpectralDecomposition> {
    h0.require_square("spectral decomposition")?;
    if clusters.len() != contours.len() || clusters.is_empty() {
        return Err(Error::Dimension(format!(
            "{} clusters but {} contours",
            clusters.len(),
            contours.len()
        )));
    }
    for (i, a) in contours.iter().enumerate() {
        for b in &contours[i + 1..] {
            if (a.center - b.center).norm() < a.radius + b.radius {
                return Err(Error::Contour(format!(
                    "contours around {} and {} overlap",
                    a.center, b.center
                )));
            }
        }
    }
    let eigs = eigenvalues(h0)?;
    let covered: usize = clusters.iter().map(|c| c.algebraic_multiplicity).sum();
    if covered != eigs.len() {
        return Err(Error::Contour(format!(
            "clusters cover {covered} of {} eigenvalues",
            eigs.len()
        )));
    }
    let mut terms = Vec::with_capacity(clusters.len());
    for (cluster, contour) in clusters.iter().zip(contours) {
        contour.validate(&eigs, cluster.algebraic_multiplicity)?;
        let n = cluster.order;
        let (mut powers, lambda, _, converged) = centred_moments(h0, contour, n, options, |ps| {
            Ok(ps.iter().map(frobenius_norm).sum())
        })?;
        let nilpotent_powers = powers.split_off(1);
        terms.push(ClusterTerms {
            cluster: cluster.clone(),
            eigenvalue: lambda,
            projector: powers.pop().unwrap(),
            nilpotent_powers,
            converged,
        });
    }
    Ok(SpectralDecomposition { terms })
}

/// Decomposition over every cluster of `spectrum` with default contours.
pub fn spectral_decomposition(
    h0: &ComplexMatrix,
    spectrum: &Spectrum,
    options: &ResidueOptions,
) -> Result<SpectralDecomposition> {
    let contours = spectrum
        .clusters
        .iter()
        .map(|c| spectrum.default_contour(h0, c))
        .collect::<Result<Vec<_>>>()?;
    spectral_decomposition_with(h0, &spectrum.clusters, &contours, options)
}

/// Relative mismatch between the reassembled and the directly inverted
/// Green's function at `energy`.
pub fn reconstruction_error(h0: &ComplexMatrix, decomposition: &SpectralDecomposition, energy: Complex64) -> Result<f64> {
    let direct = invert(&h0.shifted(energy).scale_real(-1.0))?;
    let rebuilt = decomposition.reconstruct_greens(energy);
    Ok(frobenius_norm(&(&rebuilt - &direct)) / frobenius_norm(&direct))
}
