//! Data behind the splitting, pseudospectrum and accuracy figures, and the
//! exceptional-surface scans of both models.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ep::{splitting_bound, surface_scan, xi_residue, Contour, ResidueOptions, SpectralCluster};
use crate::error::{Error, Result};
use crate::greens::{pseudospectrum, separatrix_level, PseudospectrumGrid, SeparatrixWindow, DEFAULT_RESOLUTION};
use crate::linalg::random::stream_rng;
use crate::linalg::{eigenvalues, spectral_norm, ComplexMatrix};
use crate::models::{
    chirality_h0, chirality_xi4, toy_h0, toy_h1, toy_xi2, toy_xi3, Branch, ChiralityModelParams, ToyModelParams,
};
use crate::petermann::{xi_via_petermann_with, DEFAULT_ETA};
use crate::table::{log_points, log_space, ScanTable};

pub const PER_DECADE: usize = 25;
pub const DEFAULT_RC: f64 = 1e-11;
pub const DEFAULT_SEED: u64 = 2024;

/// How a logarithmic axis is sampled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sampling {
    PerDecade(usize),
    Points(usize),
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::PerDecade(PER_DECADE)
    }
}

impl Sampling {
    pub fn grid(self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        match self {
            Sampling::PerDecade(k) => log_space(lo, hi, k),
            Sampling::Points(n) => {
                if !(lo > 0.0 && hi > lo) || n < 2 {
                    return Err(Error::Domain(format!("invalid log range [{lo}, {hi}] with {n} points")));
                }
                Ok(log_points(lo, hi, n))
            }
        }
    }
}

fn require_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {x}")))
    }
}

/// Displacement of the eigenvalue of `H₀ + εH₁` nearest `E_a`; ties go to
/// the lowest index.
pub fn toy_splitting(p: &ToyModelParams, epsilon: f64) -> Result<f64> {
    let h = &toy_h0(p) + &toy_h1().scale_real(epsilon);
    let eigs = eigenvalues(&h)?;
    Ok(eigs.iter().map(|z| (z - p.e_a).norm()).fold(f64::INFINITY, f64::min))
}

fn ep3_xi() -> f64 {
    toy_xi3(&ToyModelParams::real_detuned(0.0))
}

#[derive(Clone, Copy, Debug)]
pub struct Fig2Config {
    pub detuning: (f64, f64),
    pub epsilon: f64,
    pub sampling: Sampling,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self {
            detuning: (1e-4, 1.0),
            epsilon: 1e-8,
            sampling: Sampling::default(),
        }
    }
}

/// Splitting and both bounds versus detuning at fixed ε.
pub fn fig2(cfg: &Fig2Config) -> Result<ScanTable> {
    require_positive("epsilon", cfg.epsilon)?;
    let h1_norm = spectral_norm(&toy_h1())?;
    let ep3 = splitting_bound(ep3_xi(), 3, cfg.epsilon, h1_norm);
    let detunings = cfg.sampling.grid(cfg.detuning.0, cfg.detuning.1)?;
    let rows = detunings
        .par_iter()
        .map(|&d| {
            let p = ToyModelParams::real_detuned(d);
            let split = toy_splitting(&p, cfg.epsilon)?;
            let ep2 = splitting_bound(toy_xi2(&p)?, 2, cfg.epsilon, h1_norm);
            Ok(vec![d, split, ep2, ep3])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = ScanTable::new(["detuning", "splitting", "ep2_bound", "ep3_bound"]);
    for r in rows {
        table.push(r)?;
    }
    Ok(table)
}

#[derive(Clone, Copy, Debug)]
pub struct Fig3Config {
    pub epsilon: (f64, f64),
    pub detuning: f64,
    pub sampling: Sampling,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self {
            epsilon: (1e-14, 1e-2),
            detuning: 2e-3,
            sampling: Sampling::default(),
        }
    }
}

/// Splitting and both bounds versus ε at fixed detuning.
pub fn fig3(cfg: &Fig3Config) -> Result<ScanTable> {
    require_positive("detuning", cfg.detuning)?;
    let p = ToyModelParams::real_detuned(cfg.detuning);
    let h1_norm = spectral_norm(&toy_h1())?;
    let xi2 = toy_xi2(&p)?;
    let xi3 = ep3_xi();
    let eps = cfg.sampling.grid(cfg.epsilon.0, cfg.epsilon.1)?;
    let rows = eps
        .par_iter()
        .map(|&e| {
            Ok(vec![
                e,
                toy_splitting(&p, e)?,
                splitting_bound(xi2, 2, e, h1_norm),
                splitting_bound(xi3, 3, e, h1_norm),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = ScanTable::new(["epsilon", "splitting", "ep2_bound", "ep3_bound"]);
    for r in rows {
        table.push(r)?;
    }
    Ok(table)
}

#[derive(Clone, Copy, Debug)]
pub struct Fig4Config {
    pub detuning: f64,
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub resolution: usize,
    pub c_range: (f64, f64),
}

impl Default for Fig4Config {
    fn default() -> Self {
        Self {
            detuning: 2e-3,
            re_range: (-2e-3, 4e-3),
            im_range: (-3e-3, 3e-3),
            resolution: DEFAULT_RESOLUTION,
            c_range: (-12.0, -6.0),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig4Output {
    pub grid: PseudospectrumGrid,
    pub separatrix_c: f64,
}

impl Fig4Output {
    /// `{"separatrix_c": c}`.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({ "separatrix_c": self.separatrix_c })
    }
}

/// Pseudospectrum of the toy model and the level where the components
/// around `E_a` and `E_b` merge.
pub fn fig4(cfg: &Fig4Config) -> Result<Fig4Output> {
    let p = ToyModelParams::real_detuned(cfg.detuning);
    let h0 = toy_h0(&p);
    fig4_for(&h0, p.e_a, p.e_b, cfg)
}

/// [`fig4`] for an arbitrary matrix and pole pair.
pub fn fig4_for(h0: &ComplexMatrix, pole_a: Complex64, pole_b: Complex64, cfg: &Fig4Config) -> Result<Fig4Output> {
    let grid = pseudospectrum(h0, cfg.re_range, cfg.im_range, (cfg.resolution, cfg.resolution))?;
    let window = SeparatrixWindow {
        re_range: cfg.re_range,
        im_range: cfg.im_range,
        resolution: cfg.resolution,
        c_range: cfg.c_range,
    };
    let separatrix_c = separatrix_level(h0, pole_a, pole_b, &window)?;
    Ok(Fig4Output { grid, separatrix_c })
}

#[derive(Clone, Copy, Debug)]
pub struct Fig5Config {
    pub detuning: (f64, f64),
    pub sampling: Sampling,
    pub rc: f64,
    pub eta: f64,
    pub seed: u64,
    pub nodes: usize,
    pub residue: ResidueOptions,
}

impl Default for Fig5Config {
    fn default() -> Self {
        Self {
            detuning: (1e-3, 1.0),
            sampling: Sampling::default(),
            rc: DEFAULT_RC,
            eta: DEFAULT_ETA,
            seed: DEFAULT_SEED,
            nodes: crate::ep::contour::DEFAULT_START_NODES,
            residue: ResidueOptions::default(),
        }
    }
}

/// Relative error of the residue and the regularized Petermann estimates of
/// the toy EP₂ strength. Detuning `i` draws its perturbation from stream `i`.
pub fn fig5(cfg: &Fig5Config) -> Result<ScanTable> {
    require_positive("r_C", cfg.rc)?;
    require_positive("eta", cfg.eta)?;
    let detunings = cfg.sampling.grid(cfg.detuning.0, cfg.detuning.1)?;
    let rows = detunings
        .par_iter()
        .enumerate()
        .map(|(i, &d)| {
            let p = ToyModelParams::real_detuned(d);
            let h0 = toy_h0(&p);
            let exact = toy_xi2(&p)?;
            let eigs = eigenvalues(&h0)?;
            let cluster = SpectralCluster::enclosing(&eigs, p.e_a, cfg.rc, 2)?;
            let contour = Contour::new(p.e_a, cfg.rc, cfg.nodes)?;
            let residue = xi_residue(&h0, &cluster, &contour, &cfg.residue)?;
            let residue_err = (residue.strength - exact).abs() / exact;
            let petermann_err =
                match xi_via_petermann_with(&h0, p.e_a, 2, cfg.eta, &mut stream_rng(cfg.seed, i as u64)) {
                    Ok(est) => (est.xi - exact).abs() / exact,
                    Err(e) if e.is_numerical() => {
                        log::warn!("Petermann estimate at detuning {d:e}: {e}");
                        f64::NAN
                    }
                    Err(e) => return Err(e),
                };
            Ok(vec![d, residue_err, petermann_err])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = ScanTable::new(["detuning", "residue_rel_err", "petermann_rel_err"]);
    for r in rows {
        table.push(r)?;
    }
    Ok(table)
}

fn with_compensation(mut table: ScanTable, power: i32, reference: f64) -> Result<ScanTable> {
    let xi = table.column("xi").unwrap();
    let x = table.column("parameter").unwrap();
    table.columns.push("compensated".into());
    table.columns.push("reference".into());
    for ((row, xi), x) in table.rows.iter_mut().zip(xi).zip(x) {
        row.push(xi * x.abs().powi(power));
        row.push(reference);
    }
    Ok(table)
}

#[derive(Clone, Copy, Debug)]
pub struct ToyScanConfig {
    pub detuning: (f64, f64),
    pub sampling: Sampling,
    pub a: Complex64,
    pub b: Complex64,
}

impl Default for ToyScanConfig {
    fn default() -> Self {
        Self {
            detuning: (1e-4, 1.0),
            sampling: Sampling::default(),
            a: Complex64::new(-1.0, 0.0),
            b: Complex64::new(-1.0, 0.0),
        }
    }
}

/// ξ₂ of the toy EP₂ versus the detuning `d = E_b − E_a`, with `ξ₂·d` and its
/// limit `|A||B|`.
pub fn toy_surface_scan(cfg: &ToyScanConfig, options: &ResidueOptions) -> Result<ScanTable> {
    let zero = Complex64::new(0.0, 0.0);
    ToyModelParams::new(zero, Complex64::new(1.0, 0.0), cfg.a, cfg.b)?;
    let samples = cfg.sampling.grid(cfg.detuning.0, cfg.detuning.1)?;
    let table = surface_scan(
        |d| {
            let p = ToyModelParams::new(zero, Complex64::new(d, 0.0), cfg.a, cfg.b)?;
            Ok((toy_h0(&p), p.e_a))
        },
        &samples,
        2,
        options,
    )?;
    with_compensation(table, 1, cfg.a.norm() * cfg.b.norm())
}

#[derive(Clone, Copy, Debug)]
pub struct ChiralityScanConfig {
    pub center: Complex64,
    pub v: Complex64,
    pub a: Complex64,
    /// Range of `|Ω₊ − Ω₋|`.
    pub gap: (f64, f64),
    pub sampling: Sampling,
}

impl Default for ChiralityScanConfig {
    fn default() -> Self {
        Self {
            center: Complex64::new(1.0, -0.1),
            v: Complex64::new(0.5, 0.0),
            a: Complex64::new(1.0, 0.0),
            gap: (1e-3, 1.0),
            sampling: Sampling::default(),
        }
    }
}

/// ξ₂ at `Ω₊` along the `B = 0` surface as the gap to `Ω₋` closes, with
/// `ξ₂·gap²` and the fourth-order limit ξ₄.
pub fn chirality_surface_scan(cfg: &ChiralityScanConfig, options: &ResidueOptions) -> Result<ScanTable> {
    let zero = Complex64::new(0.0, 0.0);
    let xi4 = chirality_xi4(&ChiralityModelParams::on_surface(cfg.center, cfg.v, cfg.a, zero))?;
    let samples = cfg.sampling.grid(cfg.gap.0, cfg.gap.1)?;
    let table = surface_scan(
        |gap| {
            let p = ChiralityModelParams::on_surface(cfg.center, cfg.v, cfg.a, Complex64::new(gap, 0.0));
            Ok((chirality_h0(&p), p.omega(Branch::Plus)))
        },
        &samples,
        2,
        options,
    )?;
    with_compensation(table, 2, xi4)
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
