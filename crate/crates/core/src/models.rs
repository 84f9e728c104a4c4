//! Model Hamiltonians with closed-form reference values.
//!
//! * The 3×3 toy model: an EP₂ at `E_a` coupled to an isolated level `E_b`,
//!   becoming an EP₃ when the two coincide.
//! * The 4×4 chirality-transport model: two EP₂s for `B = 0` that merge into
//!   an EP₄ when the square root in `Ω±` vanishes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyModelParams {
    pub e_a: Complex64,
    pub e_b: Complex64,
    pub a: Complex64,
    pub b: Complex64,
    /// Permits `b = 0` (EP₂ degenerate with an isolated state).
    #[serde(default)]
    pub degenerate: bool,
}

impl ToyModelParams {
    pub fn new(e_a: Complex64, e_b: Complex64, a: Complex64, b: Complex64) -> Result<Self> {
        let p = Self {
            e_a,
            e_b,
            a,
            b,
            degenerate: false,
        };
        p.validate()?;
        Ok(p)
    }

    /// `A = B = −1`, `E_a = 0`, `E_b = detuning`; the figure parameter set.
    pub fn real_detuned(detuning: f64) -> Self {
        Self {
            e_a: ZERO,
            e_b: Complex64::new(detuning, 0.0),
            a: Complex64::new(-1.0, 0.0),
            b: Complex64::new(-1.0, 0.0),
            degenerate: false,
        }
    }

    pub fn with_detuning(self, detuning: Complex64) -> Self {
        Self {
            e_b: self.e_a + detuning,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, z) in [("e_a", self.e_a), ("e_b", self.e_b), ("a", self.a), ("b", self.b)] {
            if !z.is_finite() {
                return Err(Error::Domain(format!("{name} is not finite")));
            }
        }
        if self.a == ZERO {
            return Err(Error::Domain("coupling A must be nonzero".into()));
        }
        if self.b == ZERO && !self.degenerate {
            return Err(Error::Domain(
                "coupling B must be nonzero unless the degenerate flag is set".into(),
            ));
        }
        Ok(())
    }

    pub fn detuning(&self) -> f64 {
        (self.e_b - self.e_a).norm()
    }
}

/// `[[E_b, B, 0], [0, E_a, A], [0, 0, E_a]]`.
pub fn toy_h0(p: &ToyModelParams) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[p.e_b, p.b, ZERO], [ZERO, p.e_a, p.a], [ZERO, ZERO, p.e_a]])
}

/// Generic perturbation with bottom row `(1/√2, 1/√2, 0)` and unit spectral norm.
pub fn toy_h1() -> ComplexMatrix {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ComplexMatrix::from_rows(&[[ZERO; 3], [ZERO; 3], [s, s, ZERO]])
}

/// Closed-form Green's function of the toy model.
pub fn toy_greens(p: &ToyModelParams, energy: Complex64) -> ComplexMatrix {
    let gb = 1.0 / (energy - p.e_b);
    let ga = 1.0 / (energy - p.e_a);
    ComplexMatrix::from_rows(&[
        [gb, p.b * gb * ga, p.a * p.b * gb * ga * ga],
        [ZERO, ga, p.a * ga * ga],
        [ZERO, ZERO, ga],
    ])
}

/// ξ of the EP₂ at `E_a`: `|A| sqrt(1 + |B|²/|E_b − E_a|²)`.
pub fn toy_xi2(p: &ToyModelParams) -> Result<f64> {
    let d = p.detuning();
    if d == 0.0 {
        return Err(Error::Domain(
            "zero detuning: the EP is third order, use toy_xi3".into(),
        ));
    }
    let ratio = p.b.norm() / d;
    Ok(p.a.norm() * ratio.hypot(1.0))
}

/// ξ at zero detuning: `|A||B|` for the EP₃, or `|A|` for the EP₂ left when
/// `B = 0` under the degenerate flag.
pub fn toy_xi3(p: &ToyModelParams) -> f64 {
    if p.degenerate && p.b == ZERO {
        p.a.norm()
    } else {
        p.a.norm() * p.b.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiralityModelParams {
    pub omega_is: Complex64,
    pub omega_ch: Complex64,
    pub v: Complex64,
    pub a: Complex64,
    pub b: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

impl ChiralityModelParams {
    pub fn center(&self) -> Complex64 {
        (self.omega_is + self.omega_ch) * 0.5
    }

    /// Principal square root in `Ω± = center ± root`.
    pub fn root(&self) -> Complex64 {
        let half = (self.omega_is - self.omega_ch) * 0.5;
        (self.v * self.v + half * half).sqrt()
    }

    /// The two distinct eigenvalues for `B = 0`.
    pub fn omega(&self, branch: Branch) -> Complex64 {
        self.center() + branch.sign() * self.root()
    }

    /// Parameters on the `B = 0` exceptional surface whose two EP₂s are
    /// separated by `gap` (complex), keeping `V`, `A` and the centre fixed.
    /// `gap = 0` is the EP₄.
    pub fn on_surface(center: Complex64, v: Complex64, a: Complex64, gap: Complex64) -> Self {
        let half_gap = gap * 0.5;
        let delta = (half_gap * half_gap - v * v).sqrt();
        Self {
            omega_is: center + delta,
            omega_ch: center - delta,
            v,
            a,
            b: ZERO,
        }
    }

    fn scale(&self) -> f64 {
        self.omega_is.norm() + self.omega_ch.norm() + self.v.norm()
    }
}

/// The 4×4 Hamiltonian with corner blocks coupled through `A` and `B`.
pub fn chirality_h0(p: &ChiralityModelParams) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        [p.omega_is, p.v, ZERO, ZERO],
        [p.v, p.omega_ch, p.a, ZERO],
        [ZERO, p.b, p.omega_ch, p.v],
        [ZERO, ZERO, p.v, p.omega_is],
    ])
}

/// Closed-form eigenvalues `Ω_{±,σ}` ordered `[(+,+), (−,+), (+,−), (−,−)]`.
pub fn chirality_eigenvalues(p: &ChiralityModelParams) -> [Complex64; 4] {
    let sab = (p.a * p.b).sqrt();
    let mut out = [ZERO; 4];
    for (idx, sigma) in [1.0, -1.0].into_iter().enumerate() {
        let centre = (p.omega_is + p.omega_ch + sigma * sab) * 0.5;
        let half = (p.omega_is - p.omega_ch - sigma * sab) * 0.5;
        let root = (p.v * p.v + half * half).sqrt();
        out[2 * idx] = centre + root;
        out[2 * idx + 1] = centre - root;
    }
    out
}

fn require_b_zero(p: &ChiralityModelParams) -> Result<()> {
    if p.b != ZERO {
        return Err(Error::Domain("closed-form strengths need B = 0".into()));
    }
    Ok(())
}

/// ξ of the EP₂ at `Ω_branch`: `|A| (|V|² + |Ω − Ω_is|²) / |Ω_other − Ω|²`.
pub fn chirality_xi2(p: &ChiralityModelParams, branch: Branch) -> Result<f64> {
    require_b_zero(p)?;
    let here = p.omega(branch);
    let there = p.omega(branch.other());
    let gap = (there - here).norm();
    if gap <= 1e-14 * p.scale() {
        return Err(Error::Domain("Ω+ = Ω−: the EPs have merged, use chirality_xi4".into()));
    }
    Ok(p.a.norm() * (p.v.norm_sqr() + (here - p.omega_is).norm_sqr()) / (gap * gap))
}

/// ξ of the EP₄ with `Ω+ = Ω− = (Ω_is + Ω_ch)/2`.
pub fn chirality_xi4(p: &ChiralityModelParams) -> Result<f64> {
    require_b_zero(p)?;
    if (2.0 * p.root()).norm() > 1e-6 * p.scale() {
        return Err(Error::Domain("Ω+ ≠ Ω−: not at the fourth-order EP".into()));
    }
    let c = p.center();
    Ok(p.a.norm() * (p.v.norm_sqr() + (c - p.omega_is).norm_sqr()))
}
