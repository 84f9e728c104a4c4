//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use epsrs::ep::{
    cluster_spectrum, passive_bound_check, reconstruction_error, spectral_decomposition, xi_at, xi_residue,
    xi_residue_default, xi_special, ClusterOptions, ResidueOptions, SpectralCluster,
};
use epsrs::experiments::{
    fig2, fig3, fig4, fig5, log_log_slope, toy_splitting, toy_surface_scan, Fig2Config, Fig3Config, Fig4Config,
    Fig5Config, Sampling, ToyScanConfig,
};
use epsrs::linalg::random::{complex_in_annulus, ginibre, random_unitary, seeded_rng, EpRng};
use epsrs::linalg::{eig, eigenvalues, frobenius_norm, singular_values, spectral_norm, vector_norm, ComplexMatrix};
use epsrs::models::{
    chirality_h0, chirality_xi2, chirality_xi4, toy_h0, toy_h1, toy_xi2, toy_xi3, Branch, ChiralityModelParams,
    ToyModelParams,
};
use epsrs::petermann::{petermann_factor, projector_of_state};
use epsrs::Complex64;
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn boxed(rng: &mut EpRng) -> Complex64 {
    complex_in_annulus(rng, 0.1, 10.0)
}

fn fig5_table() -> (epsrs::table::ScanTable, Duration) {
    let start = Instant::now();
    let t = fig5(&Fig5Config {
        sampling: Sampling::Points(50),
        ..Fig5Config::default()
    })
    .expect("fig5 runs");
    (t, start.elapsed())
}

fn residue_accuracy() -> Outcome {
    let (t, elapsed) = fig5_table();
    let worst = t.column("residue_rel_err").unwrap().into_iter().fold(0.0, f64::max);
    check(
        worst <= 1e-12 && elapsed < Duration::from_secs(10) && t.len() == 50,
        format!("max relative error {worst:.2e} over {} detunings in {elapsed:.2?}", t.len()),
    )
}

fn residue_beats_petermann() -> Outcome {
    let (t, _) = fig5_table();
    let res = t.column("residue_rel_err").unwrap();
    let pet = t.column("petermann_rel_err").unwrap();
    let losses = res.iter().zip(&pet).filter(|(r, p)| !(r <= p)).count();
    let best_pet = pet.iter().copied().fold(f64::INFINITY, f64::min);
    check(
        losses == 0,
        format!("{losses} detunings where residue error exceeds Petermann error (smallest Petermann error {best_pet:.2e})"),
    )
}

fn splitting_bound() -> Outcome {
    let eps = 1e-8;
    let t = fig2(&Fig2Config::default()).map_err(|e| e.to_string())?;
    let d = t.column("detuning").unwrap();
    let split = t.column("splitting").unwrap();
    let ep2 = t.column("ep2_bound").unwrap();
    let ep3 = t.column("ep3_bound").unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..t.len() {
        if d[i] >= 1e-2 {
            let xi2 = toy_xi2(&ToyModelParams::real_detuned(d[i])).unwrap();
            worst = worst.max(split[i].powi(2) / (eps * xi2));
        }
        if split[i] > ep2[i].max(ep3[i]) {
            return Err(format!("splitting {:e} above both bounds at detuning {:e}", split[i], d[i]));
        }
    }
    let p0 = ToyModelParams::real_detuned(0.0);
    let xi3 = toy_xi3(&p0);
    let s0 = toy_splitting(&p0, eps).unwrap();
    let ratio3 = s0.powi(3) / (eps * xi3);
    check(
        worst <= 1.0 && ratio3 <= 1.0 && xi3 == 1.0,
        format!("max |ΔE|²/(εξ₂) = {worst:.6} for d ≥ 1e-2; |ΔE|³/(εξ₃) = {ratio3:.6} at d = 0 with ξ₃ = {xi3}"),
    )
}

fn nth_root_scaling() -> Outcome {
    let slope = |lo: f64, hi: f64| {
        let t = fig3(&Fig3Config {
            epsilon: (lo, hi),
            ..Fig3Config::default()
        })
        .unwrap();
        log_log_slope(&t.column("epsilon").unwrap(), &t.column("splitting").unwrap())
    };
    let (s2, s3) = (slope(1e-13, 1e-10), slope(1e-6, 1e-3));
    check(
        (s2 - 0.5).abs() <= 0.05 && (s3 - 1.0 / 3.0).abs() <= 0.05,
        format!("slopes {s2:.4} on [1e-13, 1e-10] and {s3:.4} on [1e-6, 1e-3]"),
    )
}

fn divergence_law() -> Outcome {
    let t = toy_surface_scan(&ToyScanConfig::default(), &ResidueOptions::default()).map_err(|e| e.to_string())?;
    let d = t.column("parameter").unwrap();
    let xi = t.column("xi").unwrap();
    let comp = t.column("compensated").unwrap();
    let mut worst: f64 = 0.0;
    let (mut fx, mut fy) = (Vec::new(), Vec::new());
    for i in 0..t.len() {
        if d[i] <= 1e-2 {
            worst = worst.max((comp[i] - 1.0).abs());
            fx.push(d[i]);
            fy.push(xi[i]);
        }
    }
    let slope = log_log_slope(&fx, &fy);
    check(
        worst <= 1e-3 && (slope + 1.0).abs() <= 0.02,
        format!("max |ξ₂d − 1| = {worst:.2e} for d ≤ 1e-2; slope {slope:.5}"),
    )
}

fn chirality_model() -> Outcome {
    let mut rng = seeded_rng(6);
    let mut worst: f64 = 0.0;
    let mut draws = 0;
    while draws < 20 {
        let p = ChiralityModelParams {
            omega_is: boxed(&mut rng),
            omega_ch: boxed(&mut rng),
            v: boxed(&mut rng),
            a: boxed(&mut rng),
            b: c(0.0, 0.0),
        };
        if (p.omega(Branch::Plus) - p.omega(Branch::Minus)).norm() < 0.1 {
            continue;
        }
        draws += 1;
        let h0 = chirality_h0(&p);
        for branch in [Branch::Plus, Branch::Minus] {
            let want = chirality_xi2(&p, branch).unwrap();
            let (r, _) = xi_at(&h0, p.omega(branch), 2, &ResidueOptions::default()).map_err(|e| e.to_string())?;
            worst = worst.max((r.strength - want).abs() / want);
        }
    }
    let mut ratio_dev: f64 = 0.0;
    for k in 0..5 {
        let center = boxed(&mut rng);
        let v = boxed(&mut rng);
        let a = boxed(&mut rng);
        let xi4 = chirality_xi4(&ChiralityModelParams::on_surface(center, v, a, c(0.0, 0.0))).unwrap();
        let gap = complex_in_annulus(&mut rng, 1.0, 1.0) * v.norm() * if k % 2 == 0 { 1e-2 } else { 5e-3 };
        let p = ChiralityModelParams::on_surface(center, v, a, gap);
        let split = (p.omega(Branch::Plus) - p.omega(Branch::Minus)).norm();
        let (r, _) = xi_at(&chirality_h0(&p), p.omega(Branch::Plus), 2, &ResidueOptions::default())
            .map_err(|e| e.to_string())?;
        ratio_dev = ratio_dev.max((r.strength * split * split / xi4 - 1.0).abs());
    }
    check(
        worst <= 1e-10 && ratio_dev <= 1e-2,
        format!("max ξ₂ relative error {worst:.2e} over 20 draws; max merging-ratio deviation {ratio_dev:.2e}"),
    )
}

fn separatrix() -> Outcome {
    let start = Instant::now();
    let out = fig4(&Fig4Config::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let c_star = out.separatrix_c;
    check(
        (c_star + 8.9262).abs() <= 0.01 && elapsed < Duration::from_secs(60),
        format!("c* = {c_star:.5} in {elapsed:.2?}"),
    )
}

fn petermann_identities() -> Outcome {
    let mut rng = seeded_rng(8);
    let mut worst: f64 = 0.0;
    let mut min_k = f64::INFINITY;
    for _ in 0..100 {
        let m = rng.random_range(2..=6);
        for pair in eig(&ginibre(m, &mut rng)).unwrap() {
            let k = petermann_factor(&pair).unwrap();
            let p = spectral_norm(&projector_of_state(&pair).unwrap()).unwrap();
            min_k = min_k.min(k);
            worst = worst.max((k.sqrt() - p).abs() / p);
        }
    }
    let p = ToyModelParams::real_detuned(0.5);
    let xi = toy_xi2(&p).unwrap();
    let perturbed = &toy_h0(&p) + &toy_h1().scale_real(1e-10);
    let mut pairs = eig(&perturbed).unwrap();
    pairs.sort_by(|a, b| (a.eigenvalue - p.e_a).norm().total_cmp(&(b.eigenvalue - p.e_a).norm()));
    let mut eq17: f64 = 0.0;
    for pair in &pairs[..2] {
        let ratio = petermann_factor(pair).unwrap().sqrt() * 2.0 * (pair.eigenvalue - p.e_a).norm() / xi;
        eq17 = eq17.max((ratio - 1.0).abs());
    }
    check(
        worst <= 1e-10 && eq17 <= 1e-3 && min_k >= 1.0 - 1e-12,
        format!("max |√K − ‖P‖|/‖P‖ = {worst:.2e}; min K = {min_k:.6}; max ratio deviation {eq17:.2e}"),
    )
}

fn decomposition_check(h0: &ComplexMatrix, rng: &mut EpRng) -> Result<(f64, f64), String> {
    let spectrum = cluster_spectrum(h0, &ClusterOptions::default()).map_err(|e| e.to_string())?;
    let d = spectral_decomposition(h0, &spectrum, &ResidueOptions::default()).map_err(|e| e.to_string())?;
    let scale = frobenius_norm(h0).max(1.0);
    let mut recon: f64 = 0.0;
    for _ in 0..20 {
        let e = complex_in_annulus(rng, 0.2 * scale, 2.0 * scale);
        recon = recon.max(reconstruction_error(h0, &d, e).map_err(|e| e.to_string())?);
    }
    let mut proj: f64 = 0.0;
    let m = h0.rows();
    for (j, a) in d.terms.iter().enumerate() {
        for (l, b) in d.terms.iter().enumerate() {
            let prod = a.projector.matmul(&b.projector);
            let want = if j == l { b.projector.clone() } else { ComplexMatrix::zeros(m, m) };
            let norm = frobenius_norm(&a.projector) * frobenius_norm(&b.projector);
            proj = proj.max(frobenius_norm(&(&prod - &want)) / norm.max(1.0));
        }
    }
    let largest = d.terms.iter().map(|t| frobenius_norm(&t.projector)).fold(1.0, f64::max);
    proj = proj.max(frobenius_norm(&(&d.projector_sum() - &ComplexMatrix::identity(m))) / largest);
    Ok((recon, proj))
}

fn decomposition() -> Outcome {
    let mut rng = seeded_rng(9);
    let mut matrices = vec![
        toy_h0(&ToyModelParams::real_detuned(0.5)),
        toy_h0(&ToyModelParams::real_detuned(2e-3)),
        toy_h0(&ToyModelParams::real_detuned(0.0)),
    ];
    for _ in 0..3 {
        let p = ChiralityModelParams {
            omega_is: boxed(&mut rng),
            omega_ch: boxed(&mut rng),
            v: boxed(&mut rng),
            a: boxed(&mut rng),
            b: c(0.0, 0.0),
        };
        matrices.push(chirality_h0(&p));
    }
    matrices.push(chirality_h0(&ChiralityModelParams::on_surface(c(0.5, -0.25), c(0.0, 0.75), c(0.3, 0.0), c(0.0, 0.0))));
    let (mut recon, mut proj): (f64, f64) = (0.0, 0.0);
    for h0 in &matrices {
        let (r, p) = decomposition_check(h0, &mut rng)?;
        recon = recon.max(r);
        proj = proj.max(p);
    }
    check(
        recon <= 1e-10 && proj <= 1e-10,
        format!("max reconstruction error {recon:.2e}, max projector-algebra error {proj:.2e} over {} matrices", matrices.len()),
    )
}

fn passive_bound() -> Outcome {
    let p = ToyModelParams::real_detuned(2e-3);
    let h0 = toy_h0(&p);
    let spectrum = cluster_spectrum(&h0, &ClusterOptions::default()).map_err(|e| e.to_string())?;
    let ep = spectrum.leading_cluster();
    let report = xi_residue_default(&h0, &spectrum, ep, &ResidueOptions::default()).map_err(|e| e.to_string())?;
    let toy = passive_bound_check(&report, 2);
    let mut jordan_ok = true;
    for (a, expect) in [(0.5, true), (2.0, true), (2.5, false)] {
        let lambda = c(0.0, -1.0);
        let j = ComplexMatrix::from_rows(&[[lambda, c(a, 0.0)], [c(0.0, 0.0), lambda]]);
        let r = xi_special(&j, lambda, 2).map_err(|e| e.to_string())?;
        let chk = passive_bound_check(&r, 2);
        jordan_ok &= chk.satisfied == expect && chk.bound == 2.0;
    }
    check(
        !toy.satisfied && toy.bound < 1e-12 && jordan_ok,
        format!(
            "toy EP₂: ξ = {:.3}, bound {:.2e} → satisfied = {}; Jordan blocks with |A| ≤ 2 satisfied: {jordan_ok}",
            report.strength, toy.bound, toy.satisfied
        ),
    )
}

fn special_general_equivalence() -> Outcome {
    let mut rng = seeded_rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(2..=4);
        let lambda = boxed(&mut rng);
        let mut j = ComplexMatrix::from_diag(&vec![lambda; n]);
        for k in 0..n - 1 {
            j[(k, k + 1)] = complex_in_annulus(&mut rng, 0.5, 2.0);
        }
        let u = random_unitary(n, &mut rng);
        let h0 = u.matmul(&j).matmul(&u.adjoint());
        let special = xi_special(&h0, lambda, n).map_err(|e| e.to_string())?;
        let spectrum = cluster_spectrum(&h0, &ClusterOptions::default()).map_err(|e| e.to_string())?;
        if spectrum.clusters.len() != 1 || spectrum.clusters[0].order != n {
            return Err(format!("expected one order-{n} cluster, got {:?}", spectrum.clusters));
        }
        let r = xi_residue_default(&h0, &spectrum, &spectrum.clusters[0], &ResidueOptions::default())
            .map_err(|e| e.to_string())?;
        worst = worst.max((r.strength - special.strength).abs() / special.strength);
    }
    check(worst <= 1e-11, format!("max relative difference {worst:.2e} over 50 matrices"))
}

fn property_suites() -> Outcome {
    let mut rng = seeded_rng(12);
    let mut norm_err: f64 = 0.0;
    for _ in 0..50 {
        let m = rng.random_range(1..=6);
        let a = ginibre(m, &mut rng);
        let b = ginibre(m, &mut rng);
        let s = boxed(&mut rng);
        for norm in [frobenius_norm as fn(&ComplexMatrix) -> f64, |x: &ComplexMatrix| spectral_norm(x).unwrap()] {
            let (na, nb) = (norm(&a), norm(&b));
            if norm(&(&a + &b)) > (na + nb) * (1.0 + 1e-14) {
                return Err("triangle inequality violated".into());
            }
            norm_err = norm_err.max((norm(&a.scale(s)) - s.norm() * na).abs() / (s.norm() * na));
            let v: Vec<Complex64> = (0..m).map(|_| boxed(&mut rng)).collect();
            if vector_norm(&a.matvec(&v)) > na * vector_norm(&v) * (1.0 + 1e-14) {
                return Err("norm not compatible with the vector 2-norm".into());
            }
            let (u, w) = (random_unitary(m, &mut rng), random_unitary(m, &mut rng));
            norm_err = norm_err.max((norm(&u.matmul(&a).matmul(&w)) - na).abs() / na);
        }
        if spectral_norm(&a).unwrap() > frobenius_norm(&a) * (1.0 + 1e-14) {
            return Err("spectral norm exceeds Frobenius norm".into());
        }
    }

    let opts = ResidueOptions::default();
    let (mut unitary_err, mut radius_err, mut rank1): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..20 {
        let d = rng.random_range(0.5..2.0);
        let p = ToyModelParams::new(c(0.0, 0.0), c(d, 0.0), boxed(&mut rng), boxed(&mut rng)).unwrap();
        let h0 = toy_h0(&p);
        let base = xi_at(&h0, p.e_a, 2, &opts).map_err(|e| e.to_string())?.0;
        let u = random_unitary(3, &mut rng);
        let rotated = u.adjoint().matmul(&h0).matmul(&u);
        let rot = xi_at(&rotated, p.e_a, 2, &opts).map_err(|e| e.to_string())?.0;
        unitary_err = unitary_err.max((rot.strength - base.strength).abs() / base.strength);

        let eigs = eigenvalues(&h0).unwrap();
        let r0 = 0.25 * d;
        let cluster = SpectralCluster::enclosing(&eigs, p.e_a, r0, 2).unwrap();
        for factor in [0.5, 2.0] {
            let mut contour = base.contour.unwrap().with_radius(r0).unwrap();
            let reference = xi_residue(&h0, &cluster, &contour, &opts).unwrap().strength;
            contour = contour.with_radius(r0 * factor).unwrap();
            let moved = xi_residue(&h0, &cluster, &contour, &opts).unwrap().strength;
            radius_err = radius_err.max((moved - reference).abs() / reference);
            let doubled = contour.with_nodes(2 * base.quadrature_nodes_used).unwrap();
            let more = xi_residue(&h0, &cluster, &doubled, &opts).unwrap().strength;
            radius_err = radius_err.max((more - moved).abs() / moved);
        }
        let sv = singular_values(&rot.w_operator).unwrap();
        rank1 = rank1.max(sv[1] / sv[0]);
    }
    check(
        norm_err <= 1e-12 && unitary_err <= 1e-11 && radius_err <= 1e-12 && rank1 <= 1e-10,
        format!(
            "norm invariance {norm_err:.2e}; ξ unitary invariance {unitary_err:.2e}; \
             contour independence {radius_err:.2e}; W rank-1 residual {rank1:.2e}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("residue accuracy", residue_accuracy),
        ("residue beats regularized Petermann", residue_beats_petermann),
        ("splitting bound", splitting_bound),
        ("nth-root scaling", nth_root_scaling),
        ("divergence law", divergence_law),
        ("4x4 chirality model", chirality_model),
        ("pseudospectrum separatrix", separatrix),
        ("Petermann identities", petermann_identities),
        ("decomposition reconstruction", decomposition),
        ("passive-bound violation", passive_bound),
        ("special/general equivalence", special_general_equivalence),
        ("property suites", property_suites),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail} [{:.2?}]", i + 1, start.elapsed());
    }
    if failures > 0 {
        println!("{failures} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
