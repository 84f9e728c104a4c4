//! Exceptional-point detection and the spectral response strength.

pub mod bounds;
pub mod cluster;
pub mod contour;
pub mod residue;
pub mod scan;

pub use bounds::{passive_bound, passive_bound_check, perturbation_genericity, splitting_bound, PassiveBound};
pub use cluster::{cluster_spectrum, group_spectrum, ClusterOptions, DeclaredOrder, SpectralCluster, Spectrum};
pub use contour::{Contour, ResidueOptions};
pub use residue::{
    reconstruction_error, spectral_decomposition, spectral_decomposition_with, xi_residue, xi_residue_default,
    xi_special, ClusterTerms, EpReport, SpectralDecomposition,
};
pub use scan::{surface_scan, xi_at};
