//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities (run with `--nocapture` to see them all).

mod common;

use std::time::Instant;

use helmpseudo::cli::{run_bisect, run_gmres, run_psgrid, Problem, RunConfig, SigmaRule};
use helmpseudo::fem::{
    assemble_fem, assemble_helmholtz, assemble_poisson_dirichlet, assemble_shifted_laplace,
    HelmholtzParams,
};
use helmpseudo::linalg::{
    fov_boundary, fov_support_point, gmres, hermitian_extremes, resolvent_norm,
    smallest_singular_value, FovOpts, FovPolygon, LinearOp, PreconditionedOperator,
    ResolventOpts, ResolventQuery,
};
use helmpseudo::mesh::{lshape_at_level, mesh_size};
use helmpseudo::pseudospectrum::winding_number;
use helmpseudo::sparse::SparseComplexMatrix;
use helmpseudo::theory::gmres_circle_bound;
use helmpseudo::Complex64;
use rand::Rng;
use rand::SeedableRng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn strict_opts() -> ResolventOpts {
    ResolventOpts { rel_tol: 1e-8, max_iter: 2500, ..ResolventOpts::default() }
}

/// The matrices of one acceptance configuration.
struct Config {
    label: String,
    a: SparseComplexMatrix,
    b: Option<SparseComplexMatrix>,
}

impl Config {
    fn poisson(level: u32) -> Self {
        let mesh = lshape_at_level(level);
        let (a, _) = assemble_poisson_dirichlet(&mesh).unwrap();
        Config { label: format!("poisson level {level}"), a, b: None }
    }

    fn helmholtz(level: u32, kappa: f64) -> Self {
        let mesh = lshape_at_level(level);
        let fm = assemble_fem(&mesh).unwrap();
        let p = HelmholtzParams::new(kappa, 0.0).unwrap();
        let a = assemble_helmholtz(&fm, &p).unwrap();
        Config { label: format!("helmholtz level {level} kappa {kappa:.3}"), a, b: None }
    }

    fn shifted_laplace(level: u32, kappa: f64, rule: SigmaRule) -> Self {
        let mesh = lshape_at_level(level);
        let fm = assemble_fem(&mesh).unwrap();
        let p = HelmholtzParams::new(kappa, rule.sigma(kappa)).unwrap();
        let a = assemble_helmholtz(&fm, &p).unwrap();
        let b = assemble_shifted_laplace(&fm, &p).unwrap();
        Config {
            label: format!("shifted-laplace level {level} kappa {kappa:.3} sigma {}", rule.label()),
            a,
            b: Some(b),
        }
    }

    fn resolvent(&self, z: Complex64, opts: &ResolventOpts) -> f64 {
        let q = match &self.b {
            None => ResolventQuery::plain(z, &self.a),
            Some(b) => ResolventQuery::preconditioned(z, &self.a, b),
        };
        resolvent_norm(&q, opts).unwrap().as_f64()
    }

    fn sigma_min_origin(&self, opts: &ResolventOpts) -> f64 {
        let q = match &self.b {
            None => ResolventQuery::plain(Complex64::ZERO, &self.a),
            Some(b) => ResolventQuery::preconditioned(Complex64::ZERO, &self.a, b),
        };
        smallest_singular_value(&q, opts).unwrap()
    }

    /// Runs `f` with the operator as a LinearOp (preconditioned when B is
    /// present).
    fn with_operator<R>(&self, f: impl FnOnce(&dyn LinearOp) -> R) -> R {
        match &self.b {
            None => f(&self.a),
            Some(b) => {
                let op = PreconditionedOperator::new(self.a.clone(), b.clone()).unwrap();
                f(&op)
            }
        }
    }
}

fn all_soundness_configs() -> Vec<Config> {
    let pi = std::f64::consts::PI;
    let mut configs = vec![Config::poisson(1), Config::poisson(2)];
    for level in [2u32, 3] {
        for mult in [4.0, 8.0] {
            configs.push(Config::helmholtz(level, mult * pi));
        }
    }
    for level in [2u32, 3] {
        for rule in [SigmaRule::HalfKappa, SigmaRule::HalfKappaSquared] {
            configs.push(Config::shifted_laplace(level, 8.0 * pi, rule));
        }
    }
    configs
}

// ---------------------------------------------------------------------------
// 1. Normal-matrix oracle
// ---------------------------------------------------------------------------

#[test]
fn acceptance_1_normal_matrix_oracle() {
    let started = Instant::now();
    let mesh = lshape_at_level(1);
    let (a, interior) = assemble_poisson_dirichlet(&mesh).unwrap();
    assert!(
        (40..=130).contains(&interior.len()),
        "interior dof count {}",
        interior.len()
    );
    let eigs = common::sparse_hermitian_eigenvalues(&a);
    let (lo, hi) = (eigs[0], eigs[eigs.len() - 1]);

    // Resolvent norm equals 1/dist(z, spectrum) at 200 random points.
    let opts = strict_opts();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(20240501);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let z = c(
            lo - 0.5 + rng.random::<f64>() * (hi - lo + 1.0),
            2.0 * (rng.random::<f64>() - 0.5),
        );
        let r = resolvent_norm(&ResolventQuery::plain(z, &a), &opts)
            .unwrap()
            .as_f64();
        let oracle = 1.0 / common::dist_to_real_spectrum(z, &eigs);
        worst = worst.max((r - oracle).abs() / oracle);
    }
    assert!(worst <= 1e-6, "worst relative resolvent error {worst}");

    // Small-eps isolines against exact circles.
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default_for(Problem::Poisson);
    cfg.level = 1;
    cfg.epsilons = vec![0.05, 0.2];
    cfg.grid_n = 170;
    cfg.max_depth = 4;
    cfg.budget = 150_000;
    cfg.out_dir = dir.path().to_path_buf();
    let out = run_psgrid(&cfg).unwrap();
    assert!(!out.grid.budget_exceeded, "psgrid ran out of budget");
    let levels = helmpseudo::pseudospectrum::LevelSpec::new(cfg.epsilons.clone()).unwrap();
    let finest = out.grid.level_set_resolution(&levels);
    let eps = 0.05;
    let polys = out.isolines.polylines_for(eps);
    assert!(!polys.is_empty(), "no isolines extracted at eps = {eps}");
    let mut points = Vec::new();
    for p in polys {
        points.extend_from_slice(&p.points);
    }
    let hd = hausdorff_to_circles(&points, &eigs, eps);
    assert!(
        hd <= 2.0 * finest,
        "Hausdorff {hd} above 2 x finest diameter {finest}"
    );
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "criterion took {elapsed:.1} s");
    println!(
        "acceptance 1 PASS: resolvent error {worst:.2e}, Hausdorff {hd:.2e} <= {:.2e}, {elapsed:.1} s",
        2.0 * finest
    );
}

/// Two-sided discrete Hausdorff distance between extracted points and the
/// boundary of union B(eigs, eps).
fn hausdorff_to_circles(points: &[Complex64], eigs: &[f64], eps: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for &p in points {
        let d = common::dist_to_real_spectrum(p, eigs);
        worst = worst.max((d - eps).abs());
    }
    for &l in eigs {
        for k in 0..48 {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / 48.0;
            let z = c(l, 0.0) + Complex64::from_polar(eps, phi);
            if common::dist_to_real_spectrum(z, eigs) < eps * (1.0 - 1e-9) {
                continue;
            }
            let d = points
                .iter()
                .map(|&q| (q - z).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// 2. Exclusion soundness
// ---------------------------------------------------------------------------

#[test]
fn acceptance_2_exclusion_soundness() {
    let opts = strict_opts();
    for config in all_soundness_configs() {
        let sigma_min = config.sigma_min_origin(&opts);
        assert!(sigma_min > 0.0, "{}: singular at the origin", config.label);
        let eps = 0.5 * sigma_min;
        let radius = sigma_min - eps;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(20240501);
        let mut violations = 0usize;
        let mut checked = 0usize;
        while checked < 100 {
            let z = c(
                (rng.random::<f64>() - 0.5) * 2.0 * radius,
                (rng.random::<f64>() - 0.5) * 2.0 * radius,
            );
            if z.norm() >= radius {
                continue;
            }
            checked += 1;
            let r = config.resolvent(z, &opts);
            if r >= 1.0 / eps {
                violations += 1;
            }
        }
        assert_eq!(violations, 0, "{}: exclusion disc violated", config.label);
        println!(
            "acceptance 2 PASS: {} (sigma_min {sigma_min:.4}, eps {eps:.4}, 100 samples clean)",
            config.label
        );
    }
}

// ---------------------------------------------------------------------------
// 3. Inclusion soundness
// ---------------------------------------------------------------------------

/// Distance to the field of values with targeted support-point refinement:
/// when the inscribed polygon is locally too coarse, a genuine support point
/// in the query direction is added before re-measuring.
fn fov_distance_refined(
    op: &dyn LinearOp,
    poly: &FovPolygon,
    z: Complex64,
    fov_opts: &FovOpts,
) -> f64 {
    let mut poly = poly.clone();
    let mut dist = poly.distance(z);
    for _ in 0..4 {
        if dist == 0.0 {
            return 0.0;
        }
        // Direction from the set toward z: support there tightens the hull
        // exactly where it matters.
        let probe = fov_support_point(op, (z - nearest_hull_point(&poly, z)).arg(), fov_opts)
            .expect("support point eigensolve");
        poly = poly.merged_with(&[probe]);
        let new_dist = poly.distance(z);
        if new_dist >= dist * (1.0 - 1e-12) {
            return new_dist;
        }
        dist = new_dist;
    }
    dist
}

fn nearest_hull_point(poly: &FovPolygon, z: Complex64) -> Complex64 {
    let mut best = poly.points[0];
    let mut best_d = f64::INFINITY;
    let n = poly.points.len();
    for i in 0..n {
        let a = poly.points[i];
        let b = poly.points[(i + 1) % n.max(1)];
        let ab = b - a;
        let t = if ab.norm_sqr() == 0.0 {
            0.0
        } else {
            (((z - a).re * ab.re + (z - a).im * ab.im) / ab.norm_sqr()).clamp(0.0, 1.0)
        };
        let p = a + ab * t;
        let d = (z - p).norm();
        if d < best_d {
            best_d = d;
            best = p;
        }
    }
    best
}

#[test]
fn acceptance_3_inclusion_soundness() {
    let opts = strict_opts();
    let fov_opts = FovOpts { max_iter: 1500, tol: 1e-10, seed: 20240501 };
    for config in all_soundness_configs() {
        // Membership level: large enough that members are common in the
        // window, small enough that the dilation test stays sharp.
        let eps = match (&config.b, config.label.starts_with("poisson")) {
            (_, true) => 0.4 * config.sigma_min_origin(&opts),
            (None, false) => 1.0,
            (Some(_), false) => 0.1,
        };
        let (poly, members) = config.with_operator(|op| {
            let poly = fov_boundary(op, 64, &fov_opts).unwrap();
            let (re_min, re_max, im_min, im_max) = poly.bounding_box();
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(20240501);
            let mut members = Vec::new();
            let mut attempts = 0usize;
            while members.len() < 100 && attempts < 20_000 {
                attempts += 1;
                let z = c(
                    re_min - eps + rng.random::<f64>() * (re_max - re_min + 2.0 * eps),
                    im_min - eps + rng.random::<f64>() * (im_max - im_min + 2.0 * eps),
                );
                let r = config.resolvent(z, &opts);
                if r >= 1.0 / eps {
                    members.push(z);
                }
            }
            (poly, members)
        });
        assert_eq!(
            members.len(),
            100,
            "{}: could not find 100 pseudospectrum members",
            config.label
        );
        let mut worst: f64 = 0.0;
        config.with_operator(|op| {
            for &z in &members {
                let d = fov_distance_refined(op, &poly, z, &fov_opts);
                worst = worst.max(d - eps);
                assert!(
                    d <= eps + 1e-6,
                    "{}: member {z} at distance {d} from FOV (eps {eps})",
                    config.label
                );
            }
        });
        println!(
            "acceptance 3 PASS: {} (eps {eps:.4}, worst overshoot {worst:.2e} <= 1e-6)",
            config.label
        );
    }
}

// ---------------------------------------------------------------------------
// 4. Helmholtz annulus
// ---------------------------------------------------------------------------

#[test]
fn acceptance_4_helmholtz_annulus() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default_for(Problem::Helmholtz);
    cfg.level = 3;
    cfg.kappa = 8.0 * std::f64::consts::PI;
    cfg.epsilons = vec![0.01, 0.2, 1.0, 2.0];
    cfg.grid_n = 16;
    cfg.max_depth = 4;
    cfg.out_dir = dir.path().to_path_buf();
    let out = run_psgrid(&cfg).unwrap();

    // Largest eps: some closed isoline encloses the origin.
    let biggest = cfg.epsilons.last().copied().unwrap();
    let polys = out.isolines.polylines_for(biggest);
    let enclosing = polys
        .iter()
        .filter(|p| p.closed && winding_number(&p.points, Complex64::ZERO).abs() >= 1)
        .count();
    assert!(
        enclosing >= 1,
        "no closed isoline at eps {biggest} encloses the origin"
    );

    // Smallest eps: the exclusion disc around the origin is nonempty.
    let opts = strict_opts();
    let config = Config::helmholtz(3, cfg.kappa);
    let sigma_min = config.sigma_min_origin(&opts);
    let eps_small = cfg.epsilons[0];
    assert!(
        sigma_min - eps_small > 0.0,
        "exclusion radius {} not positive",
        sigma_min - eps_small
    );
    println!(
        "acceptance 4 PASS: {enclosing} enclosing isoline(s) at eps {biggest}, exclusion radius {:.4}",
        sigma_min - eps_small
    );
}

// ---------------------------------------------------------------------------
// 5. Shifted-Laplace containment
// ---------------------------------------------------------------------------

#[test]
fn acceptance_5_shifted_laplace_containment() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default_for(Problem::ShiftedLaplace);
    cfg.level = 2;
    cfg.kappa = 8.0 * std::f64::consts::PI;
    cfg.sigma_rule = SigmaRule::HalfKappaSquared;
    cfg.epsilons = vec![1e-3, 1e-1, 1.0];
    cfg.grid_n = 16;
    cfg.max_depth = 4;
    cfg.budget = 80_000;
    cfg.out_dir = dir.path().to_path_buf();
    let out = run_psgrid(&cfg).unwrap();
    let levels = helmpseudo::pseudospectrum::LevelSpec::new(cfg.epsilons.clone()).unwrap();
    let finest = out.grid.level_set_resolution(&levels);
    let eps_small = cfg.epsilons[0];
    let polys = out.isolines.polylines_for(eps_small);
    assert!(!polys.is_empty(), "no isolines at the smallest eps");
    let center = c(0.5, 0.0);
    let mut count = 0usize;
    let mut worst: f64 = 0.0;
    for p in polys {
        for q in &p.points {
            count += 1;
            worst = worst.max((q - center).norm());
            assert!(
                (q - center).norm() <= 0.5 + finest,
                "isoline point {q} outside B(1/2, 1/2) + {finest}"
            );
        }
    }
    println!(
        "acceptance 5 PASS: {count} isoline points at eps {eps_small}, max |z - 1/2| = {worst:.4} <= {:.4}",
        0.5 + finest
    );
}

// ---------------------------------------------------------------------------
// 6. Closest-approach scaling
// ---------------------------------------------------------------------------

#[test]
fn acceptance_6_closest_approach_scaling() {
    let started = Instant::now();
    let pi = std::f64::consts::PI;
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default_for(Problem::ShiftedLaplace);
    cfg.level = 3;
    cfg.out_dir = dir.path().to_path_buf();
    let target_eps = 2e-2;
    let kappas = [4.0 * pi, 8.0 * pi, 16.0 * pi];
    let rows = run_bisect(&cfg, target_eps, &kappas).unwrap();
    for rule in [SigmaRule::HalfKappa, SigmaRule::HalfKappaSquared] {
        let series: Vec<(f64, f64)> = rows
            .iter()
            .filter(|(k, s, _)| (s - rule.sigma(*k)).abs() <= 1e-9 * s.max(1.0))
            .map(|&(k, _, x)| (k, x))
            .collect();
        assert_eq!(series.len(), kappas.len());
        // One-point calibration on the smallest kappa, then a +-25% fit.
        let model = |k: f64| k / (k + rule.sigma(k));
        let c_cal = series[0].1 / model(series[0].0);
        for &(k, x) in &series {
            let predicted = c_cal * model(k);
            let rel = (x - predicted).abs() / predicted;
            assert!(
                rel <= 0.25,
                "{}: kappa {k} measured {x} vs fit {predicted} (rel dev {rel:.3})",
                rule.label()
            );
        }
        println!(
            "acceptance 6 PASS: rule {} fits C kappa/(kappa+sigma) with C = {c_cal:.3} within 25%",
            rule.label()
        );
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "bisection sweep took {elapsed:.1} s");
    println!("acceptance 6 PASS: sweep completed in {elapsed:.1} s (< 600 s)");
}

// ---------------------------------------------------------------------------
// 7. GMRES trends
// ---------------------------------------------------------------------------

#[test]
fn acceptance_7_gmres_trends() {
    let pi = std::f64::consts::PI;
    let kappas = [4.0 * pi, 8.0 * pi, 16.0 * pi];
    let dir = tempfile::tempdir().unwrap();
    let mut results = Vec::new();
    for rule in [SigmaRule::HalfKappa, SigmaRule::HalfKappaSquared] {
        for (i, &kappa) in kappas.iter().enumerate() {
            let mut cfg = RunConfig::default_for(Problem::ShiftedLaplace);
            cfg.level = 4;
            cfg.kappa = kappa;
            cfg.sigma_rule = rule;
            cfg.tol = 1e-6;
            cfg.out_dir = dir.path().join(format!("{}_{i}", rule.label()));
            let (record, _) = run_gmres(&cfg).unwrap();
            assert!(record.converged, "{} kappa {kappa} did not converge", rule.label());
            results.push((rule, kappa, record.iterations, record.predicted_iterations));
        }
    }
    // sigma = 0.5 kappa: constant within +-2 iterations.
    let constant: Vec<usize> = results
        .iter()
        .filter(|(r, ..)| *r == SigmaRule::HalfKappa)
        .map(|&(_, _, n, _)| n)
        .collect();
    let cmin = *constant.iter().min().unwrap();
    let cmax = *constant.iter().max().unwrap();
    assert!(
        cmax - cmin <= 2,
        "sigma = 0.5 kappa iteration counts {constant:?} vary by more than 2"
    );
    // sigma = 0.5 kappa^2: positive linear trend with R^2 > 0.9.
    let linear: Vec<(f64, f64)> = results
        .iter()
        .filter(|(r, ..)| *r == SigmaRule::HalfKappaSquared)
        .map(|&(_, k, n, _)| (k, n as f64))
        .collect();
    let n = linear.len() as f64;
    let mean_x = linear.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = linear.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = linear.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = linear.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let syy: f64 = linear.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    assert!(slope > 0.0, "slope {slope} not positive");
    assert!(r2 > 0.9, "R^2 {r2} too low");
    // The closed-form prediction majorizes after calibration on the
    // smallest kappa.
    let predictions: Vec<(f64, usize, u64)> = results
        .iter()
        .filter(|(r, ..)| *r == SigmaRule::HalfKappaSquared)
        .map(|&(_, k, n, p)| (k, n, p.unwrap()))
        .collect();
    let scale = predictions[0].1 as f64 / predictions[0].2 as f64;
    for &(k, measured, predicted) in &predictions {
        assert!(
            scale * predicted as f64 >= measured as f64 * (1.0 - 1e-12),
            "kappa {k}: calibrated prediction {} under measured {measured}",
            scale * predicted as f64
        );
    }
    println!(
        "acceptance 7 PASS: halfk counts {constant:?} (spread <= 2); halfk2 slope {slope:.3}, R^2 {r2:.3}"
    );
}

// ---------------------------------------------------------------------------
// 8. Kernel correctness
// ---------------------------------------------------------------------------

#[test]
fn acceptance_8_kernel_correctness() {
    // Element matrices against the exact closed forms.
    let tri = helmpseudo::mesh::Mesh {
        vertices: vec![
            helmpseudo::mesh::Point2::new(0.0, 0.0),
            helmpseudo::mesh::Point2::new(1.0, 0.0),
            helmpseudo::mesh::Point2::new(0.0, 1.0),
        ],
        triangles: vec![helmpseudo::mesh::Triangle::new(0, 1, 2)],
        boundary_edges: vec![(0, 1), (1, 2), (2, 0)],
        level: 1,
    };
    let k = helmpseudo::fem::assemble_stiffness(&tri).unwrap();
    let m = helmpseudo::fem::assemble_mass(&tri).unwrap();
    let expected_k = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((k.get(i, j).re - expected_k[i][j]).abs() <= 1e-12);
            let em = if i == j { 1.0 / 12.0 } else { 1.0 / 24.0 };
            assert!((m.get(i, j).re - em).abs() <= 1e-12);
        }
    }

    // GMRES on diag(1, 2, 3): exact in at most three steps.
    let a = SparseComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
    let b = vec![c(1.0, 0.0), c(-2.0, 0.5), c(0.3, 1.0)];
    let run = gmres(&a, &b, 1e-13, 5).unwrap();
    assert!(run.iterations <= 3);
    let rel = run.residual_history.last().unwrap() / run.residual_history[0];
    assert!(rel <= 1e-12, "final relative residual {rel}");

    // Circle bound majorizes a disc-spectrum diagonal run at every step.
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(20240501);
    let center = c(3.0, 0.0);
    let radius = 1.0;
    let eigs: Vec<Complex64> = (0..40)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            center + Complex64::from_polar(r, phi)
        })
        .collect();
    let d = SparseComplexMatrix::from_diagonal(&eigs);
    let rhs = common::random_complex_vec(40, &mut rng);
    let run = gmres(&d, &rhs, 1e-14, 10).unwrap();
    for (i, res) in run.residual_history.iter().enumerate() {
        let bound = gmres_circle_bound(center, radius, 1.0, i).unwrap();
        assert!(res / run.residual_history[0] <= bound * (1.0 + 1e-12));
    }
    println!("acceptance 8 PASS: element matrices exact, GMRES kernels within bounds");
}

// ---------------------------------------------------------------------------
// 9. Scaling ratio tests
// ---------------------------------------------------------------------------

#[test]
fn acceptance_9_scaling_ratios() {
    let opts = strict_opts();
    // sigma_min of the Helmholtz matrix follows the h^2 exclusion scaling
    // across levels 2 -> 3 within [2.5, 6].
    let kappa = 4.0 * std::f64::consts::PI;
    let mut sig = Vec::new();
    for level in [2u32, 3] {
        let config = Config::helmholtz(level, kappa);
        sig.push(config.sigma_min_origin(&opts));
    }
    let ratio = sig[0] / sig[1];
    assert!(
        (2.5..=6.0).contains(&ratio),
        "sigma_min ratio across levels 2 -> 3: {ratio}"
    );

    // Mass-matrix extremes scale like h^2 within a factor 2 (ratio in [2, 8]).
    let mut extremes = Vec::new();
    for level in [2u32, 3] {
        let mesh = lshape_at_level(level);
        let fm = assemble_fem(&mesh).unwrap();
        extremes.push(hermitian_extremes(&fm.m, &opts).unwrap());
        // Mesh size halves exactly per level.
        let h = mesh_size(&mesh).h;
        let expected = 0.2 * 2f64.sqrt() / 2f64.powi(level as i32 - 1);
        assert!((h - expected).abs() < 1e-14);
    }
    let min_ratio = extremes[0].0 / extremes[1].0;
    let max_ratio = extremes[0].1 / extremes[1].1;
    assert!(
        (2.0..=8.0).contains(&min_ratio) && (2.0..=8.0).contains(&max_ratio),
        "mass eigenvalue ratios {min_ratio}, {max_ratio}"
    );
    println!(
        "acceptance 9 PASS: sigma_min ratio {ratio:.2} in [2.5, 6]; mass ratios {min_ratio:.2}, {max_ratio:.2} in [2, 8]"
    );
}
