//! ξ along a one-parameter family of matrices with an EP of fixed order.

use rayon::prelude::*;

use super::cluster::SpectralCluster;
use super::contour::{Contour, ResidueOptions, DEFAULT_START_NODES};
use super::residue::{xi_residue, EpReport};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, frobenius_norm, ComplexMatrix};
use crate::table::ScanTable;
use crate::Complex64;

pub const SCAN_COLUMNS: [&str; 6] = ["parameter", "xi", "lambda_re", "lambda_im", "foreign_distance", "valid"];

/// Residue ξ of the `order` eigenvalues nearest `lambda_ep`, on a circle of
/// half the distance to the next eigenvalue.
pub fn xi_at(h0: &ComplexMatrix, lambda_ep: Complex64, order: usize, options: &ResidueOptions) -> Result<(EpReport, f64)> {
    let eigs = eigenvalues(h0)?;
    let (cluster, foreign) = SpectralCluster::nearest(&eigs, lambda_ep, order)?;
    let radius = if foreign.is_finite() {
        0.5 * foreign
    } else {
        let r = frobenius_norm(&h0.shifted(lambda_ep));
        if r > 0.0 { r } else { 1.0 }
    };
    let spread = cluster.spread(&eigs);
    if radius <= spread {
        return Err(Error::Contour(format!(
            "EP members (spread {spread:e}) are not separated from the next eigenvalue at {foreign:e}"
        )));
    }
    let contour = Contour::new(lambda_ep, radius, DEFAULT_START_NODES)?;
    Ok((xi_residue(h0, &cluster, &contour, options)?, foreign))
}

/// One row per sample, ordered by parameter. Samples whose EP fails
/// validation are kept with `xi = NaN` and `valid = 0`.
pub fn surface_scan<F>(generator: F, samples: &[f64], order: usize, options: &ResidueOptions) -> Result<ScanTable>
where
    F: Fn(f64) -> Result<(ComplexMatrix, Complex64)> + Sync,
{
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rows: Vec<Vec<f64>> = sorted
        .par_iter()
        .map(|&x| {
            let outcome = generator(x).and_then(|(h0, lambda)| {
                let (report, foreign) = xi_at(&h0, lambda, order, options)?;
                Ok((report, foreign))
            });
            match outcome {
                Ok((r, foreign)) => vec![
                    x,
                    r.strength,
                    r.eigenvalue.re,
                    r.eigenvalue.im,
                    foreign,
                    if r.converged { 1.0 } else { 0.0 },
                ],
                Err(e) => {
                    log::warn!("scan sample {x}: {e}");
                    vec![x, f64::NAN, f64::NAN, f64::NAN, f64::NAN, 0.0]
                }
            }
        })
        .collect();
    let mut table = ScanTable::new(SCAN_COLUMNS);
    for row in rows {
        table.push(row)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{toy_h0, ToyModelParams};

    #[test]
    fn constant_family_gives_constant_xi() {
        let h0 = toy_h0(&ToyModelParams::real_detuned(0.1));
        let table = surface_scan(
            |_| Ok((h0.clone(), Complex64::new(0.0, 0.0))),
            &[3.0, 1.0, 2.0],
            2,
            &ResidueOptions::default(),
        )
        .unwrap();
        assert_eq!(table.column("parameter").unwrap(), vec![1.0, 2.0, 3.0]);
        let xi = table.column("xi").unwrap();
        assert!(xi.iter().all(|x| *x == xi[0]));
        assert!(table.column("valid").unwrap().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn failing_sample_is_flagged() {
        let table = surface_scan(
            |x| {
                if x > 1.5 {
                    Err(Error::Domain("bad".into()))
                } else {
                    Ok((toy_h0(&ToyModelParams::real_detuned(x)), Complex64::new(0.0, 0.0)))
                }
            },
            &[1.0, 2.0],
            2,
            &ResidueOptions::default(),
        )
        .unwrap();
        assert_eq!(table.column("valid").unwrap(), vec![1.0, 0.0]);
        assert!(table.column("xi").unwrap()[1].is_nan());
    }
}
