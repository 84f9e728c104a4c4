use epsrs::ep::{
    cluster_spectrum, reconstruction_error, spectral_decomposition, xi_at, xi_residue, xi_residue_default, xi_special,
    ClusterOptions, Contour, ResidueOptions, SpectralCluster,
};
use epsrs::linalg::random::{complex_in_annulus, random_unitary, seeded_rng};
use epsrs::linalg::{eigenvalues, singular_values, ComplexMatrix};
use epsrs::models::{
    chirality_eigenvalues, chirality_h0, chirality_xi2, toy_h0, toy_xi2, Branch, ChiralityModelParams, ToyModelParams,
};
use epsrs::Complex64;
use proptest::prelude::*;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn toy_report(h0: &ComplexMatrix, radius: f64, nodes: usize) -> epsrs::ep::EpReport {
    let eigs = eigenvalues(h0).unwrap();
    let (cluster, _) = SpectralCluster::nearest(&eigs, ZERO, 2).unwrap();
    let contour = Contour::new(ZERO, radius, nodes).unwrap();
    xi_residue(h0, &cluster, &contour, &ResidueOptions::default()).unwrap()
}

fn jordan_conjugate(n: usize, lambda: Complex64, couplings: &[Complex64], seed: u64) -> ComplexMatrix {
    let mut j = ComplexMatrix::from_diag(&vec![lambda; n]);
    for (k, a) in couplings.iter().enumerate().take(n - 1) {
        j[(k, k + 1)] = *a;
    }
    let u = random_unitary(n, &mut seeded_rng(seed));
    u.matmul(&j).matmul(&u.adjoint())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn xi_is_unitarily_invariant(d in 0.5f64..2.0, seed in any::<u64>()) {
        let h0 = toy_h0(&ToyModelParams::real_detuned(d));
        let u = random_unitary(3, &mut seeded_rng(seed));
        let rotated = u.matmul(&h0).matmul(&u.adjoint());
        let a = toy_report(&h0, d / 2.0, 64).strength;
        let b = toy_report(&rotated, d / 2.0, 64).strength;
        prop_assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
    }

    #[test]
    fn xi_is_independent_of_contour_radius(d in 0.1f64..2.0, f in 0.1f64..0.9) {
        let p = ToyModelParams::real_detuned(d);
        let h0 = toy_h0(&p);
        let want = toy_xi2(&p).unwrap();
        let got = toy_report(&h0, f * d, 64).strength;
        prop_assert!((got - want).abs() <= 1e-11 * want, "{got} vs {want}");
    }

    #[test]
    fn w_is_rank_one(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = seeded_rng(seed);
        let lambda = complex_in_annulus(&mut rng, 0.0, 2.0);
        let couplings: Vec<Complex64> = (0..n).map(|_| complex_in_annulus(&mut rng, 0.5, 2.0)).collect();
        let h0 = jordan_conjugate(n, lambda, &couplings, seed ^ 7);
        let r = xi_special(&h0, lambda, n).unwrap();
        let sv = singular_values(&r.w_operator).unwrap();
        prop_assert!(sv[1] <= 1e-10 * sv[0]);
        let want: f64 = couplings[..n - 1].iter().map(|a| a.norm()).product();
        prop_assert!((r.strength - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn residue_matches_special_on_jordan_blocks(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = seeded_rng(seed);
        let lambda = complex_in_annulus(&mut rng, 0.0, 2.0);
        let couplings: Vec<Complex64> = (0..n).map(|_| complex_in_annulus(&mut rng, 0.5, 2.0)).collect();
        let h0 = jordan_conjugate(n, lambda, &couplings, seed ^ 7);
        let spectrum = cluster_spectrum(&h0, &ClusterOptions::default()).unwrap();
        let cluster = spectrum.leading_cluster();
        prop_assert_eq!(cluster.order, n);
        let general = xi_residue_default(&h0, &spectrum, cluster, &ResidueOptions::default()).unwrap();
        let special = xi_special(&h0, lambda, n).unwrap();
        prop_assert!((general.strength - special.strength).abs() <= 1e-10 * special.strength);
    }

    #[test]
    fn chirality_residue_matches_closed_form(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let p = ChiralityModelParams {
            omega_is: complex_in_annulus(&mut rng, 0.1, 10.0),
            omega_ch: complex_in_annulus(&mut rng, 0.1, 10.0),
            v: complex_in_annulus(&mut rng, 0.1, 10.0),
            a: complex_in_annulus(&mut rng, 0.1, 10.0),
            b: ZERO,
        };
        let gap = (p.omega(Branch::Plus) - p.omega(Branch::Minus)).norm();
        prop_assume!(gap >= 0.1);
        let h0 = chirality_h0(&p);
        let eigs = chirality_eigenvalues(&p);
        let mut numeric = eigenvalues(&h0).unwrap();
        for z in eigs {
            let (k, _) = numeric.iter().enumerate().min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm())).unwrap();
            prop_assert!((numeric[k] - z).norm() <= 1e-6 * (1.0 + z.norm()));
            numeric.remove(k);
        }
        for branch in [Branch::Plus, Branch::Minus] {
            let (report, _) = xi_at(&h0, p.omega(branch), 2, &ResidueOptions::default()).unwrap();
            let want = chirality_xi2(&p, branch).unwrap();
            prop_assert!((report.strength - want).abs() <= 1e-10 * want, "{} vs {}", report.strength, want);
        }
    }

    #[test]
    fn decomposition_reassembles_greens(d in 0.05f64..2.0, seed in any::<u64>()) {
        let h0 = toy_h0(&ToyModelParams::real_detuned(d));
        let spectrum = cluster_spectrum(&h0, &ClusterOptions::default()).unwrap();
        let dec = spectral_decomposition(&h0, &spectrum, &ResidueOptions::default()).unwrap();
        let e = complex_in_annulus(&mut seeded_rng(seed), 3.0, 6.0);
        prop_assert!(reconstruction_error(&h0, &dec, e).unwrap() <= 1e-10);
    }
}
