//! Grouping of eigenvalues into isolated states and EP candidates, and
//! determination of the Jordan order of each group.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::contour::{adaptive_moments, centroid_shift, recenter, Contour, ResidueOptions, DEFAULT_START_NODES};
use crate::error::{Error, Result};
use crate::linalg::{eig, frobenius_norm, spectral_norm, ComplexMatrix};

/// Merge constant of the condition-aware second clustering stage.
pub const CONDITION_MERGE: f64 = 100.0;
/// Relative singular-value threshold of the order test.
pub const ORDER_THRESHOLD: f64 = 1e-8;

pub fn default_tolerance(h0_norm: f64) -> f64 {
    (1e-8 * h0_norm).max(1e-10)
}

/// One group of eigenvalues treated as a single `E_l⁽⁰⁾`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralCluster {
    /// Centroid of the members.
    pub eigenvalue: Complex64,
    pub algebraic_multiplicity: usize,
    /// Jordan block size; 1 for isolated or semisimple states.
    pub order: usize,
    pub member_indices: Vec<usize>,
}

impl SpectralCluster {
    /// Cluster made of every eigenvalue strictly within `radius` of `center`,
    /// with the order supplied by the caller.
    pub fn enclosing(eigenvalues: &[Complex64], center: Complex64, radius: f64, order: usize) -> Result<Self> {
        let member_indices: Vec<usize> = (0..eigenvalues.len())
            .filter(|&i| (eigenvalues[i] - center).norm() < radius)
            .collect();
        let multiplicity = member_indices.len();
        if multiplicity == 0 {
            return Err(Error::Contour(format!("no eigenvalue within {radius:e} of {center}")));
        }
        if order == 0 || order > multiplicity {
            return Err(Error::Domain(format!(
                "order {order} is incompatible with {multiplicity} enclosed eigenvalues"
            )));
        }
        Ok(Self {
            eigenvalue: center,
            algebraic_multiplicity: multiplicity,
            order,
            member_indices,
        })
    }

    /// The `order` eigenvalues nearest `center`, with the distance to the
    /// next one (infinite if there is none).
    pub fn nearest(eigenvalues: &[Complex64], center: Complex64, order: usize) -> Result<(Self, f64)> {
        if order == 0 || order > eigenvalues.len() {
            return Err(Error::Domain(format!(
                "order {order} needs between 1 and {} eigenvalues",
                eigenvalues.len()
            )));
        }
        let mut by_distance: Vec<usize> = (0..eigenvalues.len()).collect();
        by_distance.sort_by(|&i, &j| {
            let (di, dj) = ((eigenvalues[i] - center).norm(), (eigenvalues[j] - center).norm());
            di.total_cmp(&dj).then(i.cmp(&j))
        });
        let foreign = by_distance
            .get(order)
            .map_or(f64::INFINITY, |&i| (eigenvalues[i] - center).norm());
        let mut member_indices = by_distance[..order].to_vec();
        member_indices.sort_unstable();
        Ok((
            Self {
                eigenvalue: center,
                algebraic_multiplicity: order,
                order,
                member_indices,
            },
            foreign,
        ))
    }

    pub fn spread(&self, eigenvalues: &[Complex64]) -> f64 {
        self.member_indices
            .iter()
            .map(|&i| (eigenvalues[i] - self.eigenvalue).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_ep(&self) -> bool {
        self.order > 1
    }
}

/// User-declared order for the cluster whose centroid is nearest `near`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeclaredOrder {
    pub near: Complex64,
    pub order: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ClusterOptions {
    /// Chaining tolerance; defaults to `max(1e-10, 1e-8‖H₀‖_F)`.
    pub tolerance: Option<f64>,
    pub declared: Vec<DeclaredOrder>,
}

/// Eigenvalues of `H₀` with their clustering.
#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub clusters: Vec<SpectralCluster>,
    pub tolerance: f64,
    /// `‖H₀‖_F`.
    pub scale: f64,
}

impl Spectrum {
    /// Distance from the cluster centroid to the nearest non-member eigenvalue.
    pub fn foreign_distance(&self, cluster: &SpectralCluster) -> f64 {
        (0..self.eigenvalues.len())
            .filter(|i| !cluster.member_indices.contains(i))
            .map(|i| (self.eigenvalues[i] - cluster.eigenvalue).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Circle of half the foreign distance (or `‖H₀ − λ𝟙‖_F` for a lone
    /// cluster) with the default starting node count.
    pub fn default_contour(&self, h0: &ComplexMatrix, cluster: &SpectralCluster) -> Result<Contour> {
        let foreign = self.foreign_distance(cluster);
        let radius = if foreign.is_finite() {
            0.5 * foreign
        } else {
            let r = frobenius_norm(&h0.shifted(cluster.eigenvalue));
            if r > 0.0 { r } else { 1.0 }
        };
        let spread = cluster.spread(&self.eigenvalues);
        if radius <= spread {
            return Err(Error::Contour(format!(
                "cluster at {} (spread {spread:e}) is not isolated from its neighbours (radius {radius:e})",
                cluster.eigenvalue
            )));
        }
        Contour::new(cluster.eigenvalue, radius, DEFAULT_START_NODES)
    }

    /// Cluster whose centroid is nearest `z`.
    pub fn nearest_cluster(&self, z: Complex64) -> &SpectralCluster {
        self.clusters
            .iter()
            .min_by(|a, b| (a.eigenvalue - z).norm().total_cmp(&(b.eigenvalue - z).norm()))
            .expect("spectrum has at least one cluster")
    }

    /// Highest-order cluster, then largest multiplicity, then first listed.
    pub fn leading_cluster(&self) -> &SpectralCluster {
        let mut best = &self.clusters[0];
        for c in &self.clusters[1..] {
            if (c.order, c.algebraic_multiplicity) > (best.order, best.algebraic_multiplicity) {
                best = c;
            }
        }
        best
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut k = i;
        while self.0[k] != r {
            let next = self.0[k];
            self.0[k] = r;
            k = next;
        }
        r
    }

    fn union(&mut self, i: usize, j: usize) {
        let (a, b) = (self.find(i), self.find(j));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Groups eigenvalues: chained proximity within `tolerance`, then, among the
/// remaining singletons, proximity within `c·eps·‖H₀‖_F·κ` where κ is the
/// eigenvalue condition number `1/|⟨L|R⟩|`.
pub fn group_spectrum(h0: &ComplexMatrix, tolerance: Option<f64>) -> Result<(Vec<Complex64>, Vec<Vec<usize>>, f64)> {
    h0.require_square("spectrum clustering")?;
    let pairs = eig(h0)?;
    let scale = frobenius_norm(h0);
    let tol = tolerance.unwrap_or_else(|| default_tolerance(scale));
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::Domain(format!("clustering tolerance must be nonnegative, got {tol}")));
    }
    let values: Vec<Complex64> = pairs.iter().map(|p| p.eigenvalue).collect();
    let m = values.len();
    let mut uf = UnionFind((0..m).collect());
    for i in 0..m {
        for j in i + 1..m {
            if (values[i] - values[j]).norm() <= tol {
                uf.union(i, j);
            }
        }
    }
    let mut size = vec![0usize; m];
    for i in 0..m {
        size[uf.find(i)] += 1;
    }
    let singletons: Vec<usize> = (0..m).filter(|&i| size[uf.find(i)] == 1).collect();
    let kappa: Vec<f64> = pairs
        .iter()
        .map(|p| 1.0 / p.overlap().norm().max(f64::EPSILON))
        .collect();
    for (a, &i) in singletons.iter().enumerate() {
        for &j in &singletons[a + 1..] {
            let reach = CONDITION_MERGE * f64::EPSILON * scale * kappa[i].min(kappa[j]);
            if (values[i] - values[j]).norm() <= reach {
                uf.union(i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; m];
    for i in 0..m {
        let root = uf.find(i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    Ok((values, groups, tol))
}

pub fn cluster_spectrum(h0: &ComplexMatrix, options: &ClusterOptions) -> Result<Spectrum> {
    let (eigenvalues, groups, tolerance) = group_spectrum(h0, options.tolerance)?;
    let clusters: Vec<SpectralCluster> = groups
        .into_iter()
        .map(|members| {
            let centroid = members.iter().map(|&i| eigenvalues[i]).sum::<Complex64>() / members.len() as f64;
            SpectralCluster {
                eigenvalue: centroid,
                algebraic_multiplicity: members.len(),
                order: 1,
                member_indices: members,
            }
        })
        .collect();
    let mut spectrum = Spectrum {
        eigenvalues,
        clusters,
        tolerance,
        scale: frobenius_norm(h0),
    };
    let mut declared: Vec<Option<usize>> = vec![None; spectrum.clusters.len()];
    for d in &options.declared {
        let target = spectrum.nearest_cluster(d.near).clone();
        let idx = spectrum.clusters.iter().position(|c| *c == target).unwrap();
        if d.order == 0 || d.order > target.algebraic_multiplicity {
            return Err(Error::Domain(format!(
                "declared order {} exceeds the multiplicity {} of the cluster at {}",
                d.order, target.algebraic_multiplicity, target.eigenvalue
            )));
        }
        declared[idx] = Some(d.order);
    }
    for idx in 0..spectrum.clusters.len() {
        let cluster = &spectrum.clusters[idx];
        let order = match declared[idx] {
            Some(order) => order,
            None if cluster.algebraic_multiplicity == 1 => 1,
            None => determine_order(h0, &spectrum, cluster)?,
        };
        spectrum.clusters[idx].order = order;
    }
    Ok(spectrum)
}

/// Smallest `k` with `σ_max(N^k) < τ_k`, `τ_k = 1e-8 ‖H₀‖_F^k max(1, ‖P‖₂)`;
/// a deciding singular value within half a decade of its threshold is
/// reported as ambiguous.
fn determine_order(h0: &ComplexMatrix, spectrum: &Spectrum, cluster: &SpectralCluster) -> Result<usize> {
    let contour = spectrum.default_contour(h0, cluster)?;
    let mult = cluster.algebraic_multiplicity;
    let options = ResidueOptions::default();
    let quad = adaptive_moments(h0, &contour, mult + 1, &options, |ms| {
        Ok(ms.iter().map(frobenius_norm).sum())
    })?;
    let powers = recenter(&quad.moments, centroid_shift(&quad.moments)?);
    let p_norm = spectral_norm(&powers[0])?;
    let scale = spectrum.scale.max(f64::MIN_POSITIVE);
    let window = 10f64.sqrt();
    let mut previous: Option<(f64, f64)> = None;
    for (k, nk) in powers.iter().enumerate().skip(1) {
        let sigma = spectral_norm(nk)?;
        let tau = ORDER_THRESHOLD * scale.powi(k as i32) * p_norm.max(1.0);
        let ambiguous = |s: f64, t: f64| s >= t / window && s <= t * window;
        if sigma < tau {
            if let Some((s, t)) = previous.filter(|&(s, t)| ambiguous(s, t)) {
                return Err(Error::AmbiguousOrder {
                    eigenvalue: cluster.eigenvalue,
                    sigma: s,
                    threshold: t,
                });
            }
            if ambiguous(sigma, tau) {
                return Err(Error::AmbiguousOrder {
                    eigenvalue: cluster.eigenvalue,
                    sigma,
                    threshold: tau,
                });
            }
            return Ok(k);
        }
        previous = Some((sigma, tau));
    }
    log::warn!(
        "no nilpotency detected up to power {mult} at {}; using the multiplicity as order",
        cluster.eigenvalue
    );
    Ok(mult)
}
