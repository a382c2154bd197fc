//! Acceptance criteria 1–12. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails. Runtimes count against the budget.

use std::f64::consts::{E, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use jacobi_spectra::commands::{circle_points, execute, quantile_midpoints, run, Subcommand};
use jacobi_spectra::config::{DistributionConfig, ExperimentConfig, GridConfig};
use jacobi_spectra::parallel;
use jacobi_spectra_core::ensemble::{
    sample_hatano_nelson, sample_sequence, CoefficientDistribution, CoefficientTriple, HatanoNelsonParams, RealLaw,
};
use jacobi_spectra_core::measures::{counting_measure, log_holder_profile};
use jacobi_spectra_core::rng::substream;
use jacobi_spectra_core::spectra::{
    build_jacobi, build_periodic, char_poly_eval, eigenvalues, singular_values, tail_bounds, weyl_check,
};
use jacobi_spectra_core::transfer::{propagate, LyapunovMethod};
use jacobi_spectra_core::Complex64;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn two_atom() -> CoefficientDistribution {
    DistributionConfig::default().build().unwrap()
}

fn random_point(rng: &mut impl Rng, half_width: f64) -> Complex64 {
    c(rng.random_range(-half_width..half_width), rng.random_range(-half_width..half_width))
}

fn distance(z: Complex64, pts: &[Complex64]) -> f64 {
    pts.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min)
}

/// `(log|det A|, det A / |det A|)` by LU with partial pivoting.
fn dense_log_det(n: usize, mut a: Vec<Complex64>) -> (f64, Complex64) {
    let mut log_abs = 0.0;
    let mut phase = c(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm())).unwrap();
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            phase = -phase;
        }
        let piv = a[k * n + k];
        log_abs += piv.norm().ln();
        phase *= piv / piv.norm();
        for i in k + 1..n {
            let f = a[i * n + k] / piv;
            for j in k..n {
                let t = a[k * n + j];
                a[i * n + j] -= f * t;
            }
        }
    }
    (log_abs, phase)
}

fn two_atom_family() -> Vec<CoefficientDistribution> {
    let laws = [
        [(1.0, 0.0, 0.0, 1.0), (2.0, 1.0, 0.0, 0.5)],
        [(0.8, 0.3, 0.2, 1.1), (1.2, -0.4, 0.1, 0.9)],
        [(3.0, 0.0, 1.0, 1.0), (1.0, 0.0, -1.0, 1.0)],
        [(0.5, 1.0, 0.0, 2.0), (1.5, -1.0, 0.5, 0.7)],
        [(1.0, 0.25, -0.25, 1.0), (1.0, -0.75, 0.75, 1.5)],
    ];
    laws.iter()
        .map(|pair| {
            let atoms = pair
                .iter()
                .map(|&(a, br, bi, cc)| (CoefficientTriple::new(c(a, 0.0), c(br, bi), c(cc, 0.0)).unwrap(), 0.5))
                .collect();
            CoefficientDistribution::atoms(atoms).unwrap()
        })
        .collect()
}

fn factorization_identity() -> Outcome {
    let dist = two_atom();
    let n = 200;
    let mut worst: f64 = 0.0;
    let mut rng = substream(1001, 0);
    for seed in 0..20u64 {
        let seq = sample_sequence(&dist, n, seed).unwrap();
        let z_l = eigenvalues(&build_jacobi(&seq, n).unwrap()).unwrap().eigenvalues;
        let sum_log_c: f64 = seq.triples()[..n].iter().map(|t| t.c().norm().ln()).sum();
        let mut tested = 0;
        while tested < 10 {
            let z = random_point(&mut rng, 4.0);
            if distance(z, &z_l) < 0.1 {
                continue;
            }
            let f = char_poly_eval(&seq, n, z).unwrap().log_abs;
            let roots: f64 = z_l.iter().map(|w| (z - w).norm().ln()).sum();
            worst = worst.max((f + sum_log_c - roots).abs());
            tested += 1;
        }
    }
    outcome(worst <= 1e-6, format!("max |log|f_(n+1)| + Σlog|c| - Σlog|z-z_l|| = {worst:.2e} (tol 1e-6)"))
}

fn determinant_identity() -> Outcome {
    let dist = two_atom();
    let mut worst: f64 = 0.0;
    let mut rng = substream(1002, 0);
    for seed in 0..50u64 {
        let seq = sample_sequence(&dist, 1000, seed).unwrap();
        let z = random_point(&mut rng, 3.0);
        let det = propagate(&seq, z).unwrap().log_det();
        let (mut log_abs, mut arg) = (0.0, 0.0);
        for t in seq.triples() {
            let r = t.a() / t.c();
            log_abs += r.norm().ln();
            arg += r.arg();
        }
        let ratio = Complex64::from_polar((det.log_abs - log_abs).exp(), 0.0) * det.phase / Complex64::from_polar(1.0, arg);
        worst = worst.max((ratio - 1.0).norm());
    }
    outcome(worst <= 1e-8, format!("max relative error of det S_n = {worst:.2e} (tol 1e-8)"))
}

fn cross_method_agreement() -> Outcome {
    let dist = two_atom();
    let mut rng = substream(1003, 0);
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let z = random_point(&mut rng, 3.0);
        let est = |m| parallel::lyapunov(&dist, z, 100_000, 32, 500 + k, m).unwrap();
        let r = est(LyapunovMethod::Recurrence);
        let f = est(LyapunovMethod::Furstenberg);
        let p = est(LyapunovMethod::QrPair);
        for o in [f, p] {
            let ratio = (r.gamma1 - o.gamma1).abs() / (3.0 * r.std_error.hypot(o.std_error));
            worst = worst.max(ratio);
        }
    }
    outcome(
        worst <= 1.0,
        format!("max |Δγ| / (3 × combined std error) = {worst:.3} over 20 points (must be ≤ 1)"),
    )
}

fn thouless_formula() -> Outcome {
    let dist = two_atom();
    let n = 2000;
    let seq = sample_sequence(&dist, n, 4).unwrap();
    let z_l = eigenvalues(&build_jacobi(&seq, n).unwrap()).unwrap().eigenvalues;
    let e_log_c = 0.5 * (0.75f64.ln() + 1.25f64.ln());
    let pts = circle_points(c(0.0, 0.0), 5.0, 20);
    let gamma = parallel::lyapunov_at(&dist, &pts, 100_000, 64, 4, LyapunovMethod::Norm).unwrap();
    let mut worst: f64 = 0.0;
    for (z, g) in pts.iter().zip(&gamma) {
        let p: f64 = z_l.iter().map(|w| (z - w).norm().ln()).sum::<f64>() / n as f64;
        worst = worst.max((g.gamma1 - (p - e_log_c)).abs());
    }
    outcome(worst <= 5e-2, format!("max |γ - (p_n - E log|c|)| on |z| = 5: {worst:.3e} (tol 5e-2)"))
}

fn constant_coefficients() -> Outcome {
    let one = CoefficientDistribution::single(CoefficientTriple::real(1.0, 0.0, 1.0).unwrap());
    let n = 100;
    let mut z = eigenvalues(&build_jacobi(&sample_sequence(&one, n, 0).unwrap(), n).unwrap()).unwrap().eigenvalues;
    z.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut exact: Vec<f64> = (1..=n).map(|k| 2.0 * (k as f64 * PI / (n + 1) as f64).cos()).collect();
    exact.sort_by(f64::total_cmp);
    let eig_err = z.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let g = parallel::lyapunov(&one, c(3.0, 0.0), 100_000, 1, 0, LyapunovMethod::Norm).unwrap().gamma1;
    let g_err = (g - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs();
    outcome(
        eig_err <= 1e-8 && g_err <= 1e-3,
        format!("eigenvalue error {eig_err:.2e} (tol 1e-8), |γ(3) - log((3+√5)/2)| = {g_err:.2e} (tol 1e-3)"),
    )
}

fn real_spectra() -> Outcome {
    let n = 500;
    let herm = CoefficientDistribution::atoms(vec![
        (CoefficientTriple::real(1.0, -1.0, 1.0).unwrap(), 0.5),
        (CoefficientTriple::real(1.0, 0.7, 1.0).unwrap(), 0.5),
    ])
    .unwrap();
    let hn = HatanoNelsonParams::new(
        RealLaw::Uniform { low: -1.0, high: 1.0 },
        RealLaw::Uniform { low: 0.5, high: 2.0 },
        RealLaw::Uniform { low: 0.5, high: 1.5 },
        RealLaw::Uniform { low: -PI, high: PI },
    )
    .unwrap();
    let hop = HatanoNelsonParams::asymmetric_hopping(0.5, RealLaw::Uniform { low: -1.0, high: 1.0 }).unwrap();
    let (mut herm_ratio, mut hn_ratio): (f64, f64) = (0.0, 0.0);
    let mut min_complex = usize::MAX;
    for seed in 0..10u64 {
        let s = eigenvalues(&build_jacobi(&sample_sequence(&herm, n, seed).unwrap(), n).unwrap()).unwrap();
        herm_ratio = herm_ratio.max(s.max_abs_imag() / s.spectral_radius());
        let s = eigenvalues(&build_jacobi(&sample_hatano_nelson(&hn, n, seed).unwrap(), n).unwrap()).unwrap();
        hn_ratio = hn_ratio.max(s.max_abs_imag() / s.spectral_radius());
        let s = eigenvalues(&build_periodic(&sample_hatano_nelson(&hop, n, seed).unwrap(), n).unwrap()).unwrap();
        min_complex = min_complex.min(s.eigenvalues.iter().filter(|z| z.im.abs() > 1e-3).count());
    }
    outcome(
        herm_ratio <= 1e-6 && hn_ratio <= 1e-6 && min_complex >= n / 4,
        format!(
            "max |Im|/radius: Hermitian {herm_ratio:.1e}, Hatano-Nelson Dirichlet {hn_ratio:.1e} (tol 1e-6); \
             periodic complex eigenvalues ≥ {min_complex} of {n} (need {})",
            n / 4
        ),
    )
}

fn lyapunov_bounds() -> Outcome {
    let z = c(0.3, 0.2);
    let mut lower_margin = f64::INFINITY;
    let mut sum_ratio: f64 = 0.0;
    for (k, dist) in two_atom_family().iter().enumerate() {
        let CoefficientDistribution::DiscreteAtoms(d) = dist else { unreachable!() };
        let e: f64 = d.atoms().iter().map(|(t, p)| p * (t.a() / t.c()).norm().ln()).sum();
        let p = parallel::lyapunov(dist, z, 10_000, 32, 700 + k as u64, LyapunovMethod::QrPair).unwrap();
        lower_margin = lower_margin.min(p.gamma1 - (0.5 * e - 3.0 * p.std_error));
        sum_ratio = sum_ratio.max((p.gamma1 + p.gamma2 - e).abs() / (3.0 * p.log_det_std_error));
    }
    outcome(
        lower_margin >= 0.0 && sum_ratio <= 1.0,
        format!(
            "min γ1 - (½E log|a/c| - 3σ) = {lower_margin:.3e} (≥ 0); max |γ1+γ2 - E log|a/c|| / 3σ = {sum_ratio:.3} (≤ 1)"
        ),
    )
}

fn weyl_chain() -> Outcome {
    let dist = two_atom();
    let n = 50;
    let mut min_slack = f64::INFINITY;
    let mut svd_defect: f64 = 0.0;
    for seed in 0..50u64 {
        let j = build_jacobi(&sample_sequence(&dist, n, seed).unwrap(), n).unwrap();
        let z = eigenvalues(&j).unwrap().eigenvalues;
        let s = singular_values(&j).unwrap();
        let (log_det, _) = dense_log_det(n, j.to_dense());
        let frob: f64 = j.to_dense().iter().map(|x| x.norm_sqr()).sum();
        svd_defect = svd_defect
            .max((s.iter().map(|x| x.ln()).sum::<f64>() - log_det).abs())
            .max((s.iter().map(|x| x * x).sum::<f64>() / frob - 1.0).abs());
        let mut moduli: Vec<f64> = z.iter().map(|w| w.norm()).collect();
        moduli.sort_by(|a, b| b.total_cmp(a));
        for delta in [0.0, 0.5, 1.0] {
            let f = |t: f64| if delta == 0.0 { t.ln() } else { t.ln().max(0.0).powf(1.0 + delta) };
            let (mut lhs, mut rhs) = (0.0, 0.0);
            for (m, sv) in moduli.iter().zip(&s) {
                lhs += f(*m);
                rhs += f(*sv);
                min_slack = min_slack.min(rhs - lhs);
            }
            let core = weyl_check(&z, &s, delta).unwrap();
            svd_defect = svd_defect.max((core.rows.last().unwrap().rhs - rhs).abs() / rhs.abs().max(1.0));
        }
    }
    outcome(
        min_slack >= -1e-9 && svd_defect <= 1e-8,
        format!("min partial-sum slack {min_slack:.2e} (≥ -1e-9); singular value cross-check {svd_defect:.1e}"),
    )
}

fn tail_bound_chain() -> Outcome {
    let dist = two_atom();
    let n = 500;
    let nf = n as f64;
    let (mut ok, mut chain, mut halves) = (true, true, true);
    let mut agree: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mats: Vec<_> = (0..10u64).map(|s| build_jacobi(&sample_sequence(&dist, n, s).unwrap(), n).unwrap()).collect();
    let svs = parallel::with_threads(None, || {
        use rayon::prelude::*;
        mats.par_iter().map(|j| singular_values(j).unwrap()).collect::<Vec<_>>()
    })
    .unwrap();
    for (j, s) in mats.iter().zip(&svs) {
        let z = eigenvalues(j).unwrap().eigenvalues;
        let tau = |r: f64| z.iter().filter(|w| w.norm() >= r).map(|w| w.norm().ln()).sum::<f64>() / nf;
        let tau1_bound = s.iter().map(|x| (x * x).ln_1p()).sum::<f64>() / (2.0 * nf);
        ok &= tau(1.0) <= tau1_bound;
        worst_ratio = worst_ratio.max(tau(1.0) / tau1_bound);
        for delta in [0.5, 1.0] {
            let powered: f64 = s.iter().map(|x| (x * x).ln_1p().powf(1.0 + delta)).sum();
            let mut at = Vec::new();
            for r in [E, E * E] {
                let bound = powered / (2f64.powf(1.0 + delta) * nf * r.ln().powf(delta));
                let core = tail_bounds(j, s, delta, r).unwrap();
                agree = agree.max((core.tau_r_bound / bound - 1.0).abs()).max((core.tau1_bound / tau1_bound - 1.0).abs());
                chain &= core.chain_ok;
                ok &= tau(r) <= bound;
                worst_ratio = worst_ratio.max(tau(r) / bound);
                at.push(bound);
            }
            if delta == 1.0 {
                halves &= at[1] <= 0.5 * at[0] * (1.0 + 1e-12);
            }
        }
    }
    outcome(
        ok && chain && halves && agree <= 1e-12,
        format!(
            "τ ≤ bound everywhere: {ok} (max τ/bound {worst_ratio:.3}); chain {chain}; \
             bound(e²) ≤ ½ bound(e) at δ=1: {halves}; core agreement {agree:.1e}"
        ),
    )
}

fn holder_profile() -> Outcome {
    let n = 2000;
    let seq = sample_sequence(&two_atom(), n, 10).unwrap();
    let m = counting_measure(&eigenvalues(&build_jacobi(&seq, n).unwrap()).unwrap()).unwrap();
    let deltas = [0.5, 0.25, 0.1, 0.05];
    let centers = quantile_midpoints(m.points(), 10);
    let (mut bounds_ok, mut increases, mut agree) = (true, 0usize, 0.0f64);
    for z0 in &centers {
        let p = log_holder_profile(&m, *z0, &deltas).unwrap();
        let mut prev = f64::INFINITY;
        for (row, &d) in p.rows.iter().zip(&deltas) {
            let inside: Vec<f64> = m.points().iter().map(|w| (w - z0).norm()).filter(|&r| r <= d).collect();
            let mass = inside.len() as f64 / n as f64;
            let cc = inside.iter().map(|r| -r.ln()).sum::<f64>() / n as f64;
            bounds_ok &= mass <= cc / (1.0 / d).ln() * (1.0 + 1e-12);
            agree = agree.max((row.mass - mass).abs()).max((row.c - cc).abs());
            if cc > prev {
                increases += 1;
            }
            prev = cc;
        }
    }
    outcome(
        bounds_ok && increases <= 1 && agree <= 1e-12 && centers.len() == 10,
        format!(
            "bound holds at 10 centres × 4 radii: {bounds_ok}; C increases {increases} (≤ 1); core agreement {agree:.1e}"
        ),
    )
}

fn weak_convergence() -> Outcome {
    let cfg = ExperimentConfig {
        seed: 11,
        replicas: 32,
        n_ladder: vec![250, 500, 1000, 2000, 4000],
        lyapunov_n: 20_000,
        lyapunov_replicas: 8,
        grid: GridConfig {
            re: [-6.0, 6.0],
            im: [-6.0, 6.0],
            nx: 49,
            ny: 49,
        },
        convergence: jacobi_spectra::config::ConvergenceConfig { gamma_density: true },
        ..ExperimentConfig::default()
    };
    let out = execute(Subcommand::ConvergenceStudy, &cfg).unwrap();
    let s = &out.summary;
    let d: Vec<f64> = s["mean_distances"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    let mass = s["density"]["total_mass"].as_f64().unwrap();
    let seq = sample_sequence(&two_atom(), 2000, 11).unwrap();
    let z = eigenvalues(&build_jacobi(&seq, 2000).unwrap()).unwrap().eigenvalues;
    let covered = z.iter().all(|w| w.re.abs() < 5.0 && w.im.abs() < 5.0);
    outcome(
        decreasing && (mass - 1.0).abs() <= 0.05 && covered,
        format!(
            "mean distance over 32 ladders {:.4?} decreasing: {decreasing}; Laplacian-of-γ mass {mass:.4} (tol 5%); \
             rectangle covers spectrum: {covered}",
            d
        ),
    )
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig {
        seed: 5,
        n: 60,
        replicas: 3,
        n_ladder: vec![20, 40, 80],
        lyapunov_n: 1000,
        lyapunov_replicas: 3,
        grid: GridConfig {
            re: [-3.0, 3.0],
            im: [-3.0, 3.0],
            nx: 5,
            ny: 5,
        },
        thouless: jacobi_spectra::config::ThoulessConfig {
            points: 6,
            ..Default::default()
        },
        convergence: jacobi_spectra::config::ConvergenceConfig { gamma_density: true },
        ..ExperimentConfig::default()
    };
    let mut mismatches = Vec::new();
    let mut files = 0;
    for cmd in Subcommand::ALL {
        let mut reference: Option<Vec<(String, Vec<u8>)>> = None;
        for threads in [1, 2, 8] {
            let dir = tempfile::tempdir().unwrap();
            let cfg = ExperimentConfig {
                threads: Some(threads),
                ..cfg.clone()
            };
            let report = run(cmd, &cfg, dir.path()).unwrap();
            let bytes: Vec<(String, Vec<u8>)> = report
                .written
                .iter()
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap()))
                .collect();
            match &reference {
                None => {
                    files += bytes.len();
                    reference = Some(bytes);
                }
                Some(r) if *r != bytes => mismatches.push(format!("{} at {threads} threads", cmd.name())),
                Some(_) => {}
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "{} subcommands, {files} files byte-identical across 1, 2 and 8 threads{}",
            Subcommand::ALL.len(),
            if mismatches.is_empty() { String::new() } else { format!("; differ: {}", mismatches.join(", ")) }
        ),
    )
}

type Criterion = (u32, &'static str, Option<u64>, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "factorization identity", Some(10), factorization_identity),
        (2, "determinant identity", Some(5), determinant_identity),
        (3, "cross-method Lyapunov agreement", Some(120), cross_method_agreement),
        (4, "Thouless formula", Some(300), thouless_formula),
        (5, "constant-coefficient oracle", Some(10), constant_coefficients),
        (6, "real spectra", Some(60), real_spectra),
        (7, "Lyapunov bounds", Some(60), lyapunov_bounds),
        (8, "Weyl majorant chain", Some(30), weyl_chain),
        (9, "tail-bound chain", Some(60), tail_bound_chain),
        (10, "log-Hölder profile", Some(60), holder_profile),
        (11, "weak-convergence trend", Some(300), weak_convergence),
        (12, "determinism across threads", None, determinism),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= Duration::from_secs(b));
        let pass = result.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = budget.map_or(String::new(), |b| format!(", budget {b} s"));
        println!(
            "criterion {id:>2} {} {name}: {} [{:.1} s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", 12 - failed, 12);
    if failed > 0 {
        std::process::exit(1);
    }
}
