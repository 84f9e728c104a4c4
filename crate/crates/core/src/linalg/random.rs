//! Seeded random matrices for regularization and randomized testing.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{inner, vector_norm, ComplexMatrix};

pub type EpRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> EpRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> EpRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn standard_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix: i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, m, |_, _| standard_complex(rng))
}

/// Haar-distributed unitary from the QR factorization of a Ginibre sample,
/// with the phases of R's diagonal absorbed into Q.
pub fn random_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(m, rng);
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for j in 0..m {
        let mut v = g.column(j);
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for prev in &q {
                let proj = inner(prev, &v);
                for (x, p) in v.iter_mut().zip(prev) {
                    *x -= proj * p;
                }
            }
        }
        let r_jj = inner(&g.column(j), &v);
        let phase = if r_jj.norm() > 0.0 { r_jj / r_jj.norm() } else { Complex64::new(1.0, 0.0) };
        let n = vector_norm(&v);
        for x in v.iter_mut() {
            *x = *x / n * phase;
        }
        q.push(v);
    }
    ComplexMatrix::from_fn(m, m, |i, j| q[j][i])
}

/// Uniform complex number with modulus in `[lo, hi]` and uniform phase.
pub fn complex_in_annulus<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Complex64 {
    let r = rng.random_range(lo..=hi);
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, phi)
}
