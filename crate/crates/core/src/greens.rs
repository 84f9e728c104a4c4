//! Green's function `G(E) = (E𝟙 − H₀)⁻¹` and pseudospectra on complex-energy grids.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, invert, spectral_norm, ComplexMatrix};

/// Grid points closer than this to an eigenvalue are nudged off the pole.
pub const POLE_HIT: f64 = 1e-14;
/// Nudge size in units of the real grid spacing.
pub const NUDGE_FRACTION: f64 = 1e-6;
pub const DEFAULT_RESOLUTION: usize = 401;
/// Bracket width below which the separatrix search refines the grid.
pub const REFINE_BRACKET: f64 = 0.05;

pub fn greens_function(h0: &ComplexMatrix, energy: Complex64) -> Result<ComplexMatrix> {
    h0.require_square("Green's function")?;
    invert(&h0.shifted(energy).scale_real(-1.0))
}

/// `log10 ‖G(E)‖₂` sampled on a uniform grid, stored `[im][re]`.
#[derive(Clone, Debug, Serialize)]
pub struct PseudospectrumGrid {
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
    values: Vec<f64>,
    /// `(im_index, re_index)` of points moved off an eigenvalue.
    pub nudged: Vec<(usize, usize)>,
}

impl PseudospectrumGrid {
    pub fn value(&self, im_index: usize, re_index: usize) -> f64 {
        self.values[im_index * self.re_axis.len() + re_index]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.im_axis.len(), self.re_axis.len())
    }

    /// Whether `E` lies in the ε-pseudospectrum, `log10 ‖G‖ > −log10 ε`.
    pub fn in_pseudospectrum(&self, im_index: usize, re_index: usize, log10_eps: f64) -> bool {
        self.value(im_index, re_index) > -log10_eps
    }

    /// Grid indices `(im, re)` nearest to `z`.
    pub fn nearest_cell(&self, z: Complex64) -> (usize, usize) {
        (nearest_index(&self.im_axis, z.im), nearest_index(&self.re_axis, z.re))
    }

    /// CSV with header `re,im,log10_norm`, one row per point, imaginary axis outer.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,log10_norm\n");
        for (i, im) in self.im_axis.iter().enumerate() {
            for (j, re) in self.re_axis.iter().enumerate() {
                writeln!(out, "{re:.16e},{im:.16e},{:.16e}", self.value(i, j)).unwrap();
            }
        }
        out
    }

    /// Labels the 4-connected component of `{log10‖G‖ > −c}` that contains
    /// `start`; returns a membership mask (empty if `start` is outside the set).
    fn component(&self, start: (usize, usize), c: f64) -> Vec<bool> {
        let (nim, nre) = self.shape();
        let mut seen = vec![false; nim * nre];
        if !self.in_pseudospectrum(start.0, start.1, c) {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen[start.0 * nre + start.1] = true;
        while let Some((i, j)) = queue.pop_front() {
            let mut visit = |ni: usize, nj: usize| {
                let idx = ni * nre + nj;
                if !seen[idx] && self.in_pseudospectrum(ni, nj, c) {
                    seen[idx] = true;
                    queue.push_back((ni, nj));
                }
            };
            if i > 0 {
                visit(i - 1, j);
            }
            if i + 1 < nim {
                visit(i + 1, j);
            }
            if j > 0 {
                visit(i, j - 1);
            }
            if j + 1 < nre {
                visit(i, j + 1);
            }
        }
        seen
    }

    /// Number of 4-connected components of the ε-pseudospectrum on the grid.
    pub fn component_count(&self, log10_eps: f64) -> usize {
        let (nim, nre) = self.shape();
        let mut labelled = vec![false; nim * nre];
        let mut count = 0;
        for i in 0..nim {
            for j in 0..nre {
                if labelled[i * nre + j] || !self.in_pseudospectrum(i, j, log10_eps) {
                    continue;
                }
                count += 1;
                for (idx, inside) in self.component((i, j), log10_eps).into_iter().enumerate() {
                    labelled[idx] |= inside;
                }
            }
        }
        count
    }

    fn poles_connected(&self, a: (usize, usize), b: (usize, usize), c: f64) -> bool {
        let nre = self.re_axis.len();
        self.component(a, c)[b.0 * nre + b.1]
    }
}

fn nearest_index(axis: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (k, v) in axis.iter().enumerate() {
        if (v - x).abs() < (axis[best] - x).abs() {
            best = k;
        }
    }
    best
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { hi } else { lo + step * k as f64 }).collect()
}

pub fn pseudospectrum(
    h0: &ComplexMatrix,
    re_range: (f64, f64),
    im_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<PseudospectrumGrid> {
    h0.require_square("pseudospectrum")?;
    let (nre, nim) = resolution;
    if nre < 2 || nim < 2 {
        return Err(Error::Domain("pseudospectrum needs at least 2 points per axis".into()));
    }
    if !(re_range.0 < re_range.1 && im_range.0 < im_range.1) {
        return Err(Error::Domain("pseudospectrum ranges must be nonempty".into()));
    }
    let spectrum = eigenvalues(h0)?;
    let re_axis = linspace(re_range.0, re_range.1, nre);
    let im_axis = linspace(im_range.0, im_range.1, nim);
    let nudge = (re_axis[1] - re_axis[0]) * NUDGE_FRACTION;

    let mut values = vec![0.0; nre * nim];
    let mut flags = vec![false; nre * nim];
    values
        .par_chunks_mut(nre)
        .zip(flags.par_chunks_mut(nre))
        .enumerate()
        .try_for_each(|(i, (row, row_flags))| -> Result<()> {
            for j in 0..nre {
                let e = Complex64::new(re_axis[j], im_axis[i]);
                let (v, moved) = log10_resolvent_norm(h0, &spectrum, e, nudge)?;
                row[j] = v;
                row_flags[j] = moved;
            }
            Ok(())
        })?;
    let nudged = flags
        .iter()
        .enumerate()
        .filter(|(_, f)| **f)
        .map(|(idx, _)| (idx / nre, idx % nre))
        .collect();
    Ok(PseudospectrumGrid {
        re_axis,
        im_axis,
        values,
        nudged,
    })
}

fn log10_resolvent_norm(
    h0: &ComplexMatrix,
    spectrum: &[Complex64],
    e: Complex64,
    nudge: f64,
) -> Result<(f64, bool)> {
    let hits = |z: Complex64| spectrum.iter().any(|l| (l - z).norm() < POLE_HIT);
    let mut point = e;
    let mut moved = false;
    if hits(point) {
        point += nudge;
        moved = true;
    }
    let g = match greens_function(h0, point) {
        Ok(g) => g,
        Err(Error::Singular { .. }) if !moved => {
            moved = true;
            point += nudge;
            greens_function(h0, point)?
        }
        Err(e) => return Err(e),
    };
    let v = spectral_norm(&g)?.log10();
    if !v.is_finite() {
        return Err(Error::Singular { pivot: 0.0, column: 0 });
    }
    Ok((v, moved))
}

/// Search window for [`separatrix_level`].
#[derive(Clone, Copy, Debug)]
pub struct SeparatrixWindow {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub resolution: usize,
    /// Bracket `(c_lo, c_hi)` on `c = log10 ε`; components must be separate
    /// at `c_lo` and merged at `c_hi`.
    pub c_range: (f64, f64),
}

/// Level `c* = log10 ε` at which the pseudospectral components around
/// `pole_a` and `pole_b` merge, to within ±0.01.
pub fn separatrix_level(
    h0: &ComplexMatrix,
    pole_a: Complex64,
    pole_b: Complex64,
    window: &SeparatrixWindow,
) -> Result<f64> {
    if pole_a == pole_b {
        return Err(Error::Domain("poles must be distinct".into()));
    }
    let (mut lo, mut hi) = window.c_range;
    if lo >= hi {
        return Err(Error::Bracketing(format!("empty range [{lo}, {hi}]")));
    }
    let n = window.resolution;
    let mut grid = pseudospectrum(h0, window.re_range, window.im_range, (n, n))?;
    let merged = |g: &PseudospectrumGrid, c: f64| {
        g.poles_connected(g.nearest_cell(pole_a), g.nearest_cell(pole_b), c)
    };
    if merged(&grid, lo) {
        return Err(Error::Bracketing(format!("components already merged at c = {lo}")));
    }
    if !merged(&grid, hi) {
        return Err(Error::Bracketing(format!("components still separate at c = {hi}")));
    }
    let mut refined = false;
    while hi - lo > 1e-6 {
        if !refined && hi - lo < REFINE_BRACKET {
            refined = true;
            grid = pseudospectrum(h0, window.re_range, window.im_range, (2 * n - 1, 2 * n - 1))?;
            // The finer grid may shift the merge level slightly.
            while merged(&grid, lo) {
                lo -= REFINE_BRACKET;
                if lo < window.c_range.0 {
                    return Err(Error::Bracketing("refined grid lost the lower bracket".into()));
                }
            }
            while !merged(&grid, hi) {
                hi += REFINE_BRACKET;
                if hi > window.c_range.1 {
                    return Err(Error::Bracketing("refined grid lost the upper bracket".into()));
                }
            }
            continue;
        }
        let mid = 0.5 * (lo + hi);
        if merged(&grid, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
