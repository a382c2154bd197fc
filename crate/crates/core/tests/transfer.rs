mod common;

use common::{c, exact_log_ratio, triple, two_atom, two_atom_family};
use jacobi_spectra_core::ensemble::{sample_replica, sample_sequence, CoefficientDistribution, CoefficientTriple};
use jacobi_spectra_core::transfer::{
    angular_decay_probe, large_deviation_probe, lyapunov, lyapunov_pair, lyapunov_top, lyapunov_via_recurrence,
    propagate, solution_pair, transfer_matrix, LyapunovMethod, Mat2,
};
use jacobi_spectra_core::Complex64;

fn golden_log() -> f64 {
    ((3.0 + 5f64.sqrt()) / 2.0).ln()
}

#[test]
fn transfer_matrix_entries() {
    let t = CoefficientTriple::real(1.0, 0.0, 1.0).unwrap();
    let g = transfer_matrix(&t, c(2.0, 0.0));
    assert_eq!(g.matrix().0, [[c(2.0, 0.0), c(-1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
    let t = CoefficientTriple::real(3.0, 1.0, 2.0).unwrap();
    for z in [c(0.0, 0.0), c(-2.5, 1.0), c(7.0, -3.0)] {
        assert!((transfer_matrix(&t, z).det() - c(1.5, 0.0)).norm() < 1e-14);
    }
}

#[test]
fn determinant_identity_at_n_1000() {
    let dist = two_atom();
    for seed in 0..20u64 {
        let seq = sample_sequence(&dist, 1000, seed).unwrap();
        let z = c(-2.0 + 0.2 * seed as f64, 1.5 - 0.1 * seed as f64);
        let state = propagate(&seq, z).unwrap();
        // ∏ a_j / c_j in log form, summed independently
        let mut log_abs = 0.0;
        let mut arg = 0.0;
        for t in seq.triples() {
            let r = t.a() / t.c();
            log_abs += r.norm().ln();
            arg += r.arg();
        }
        let exact = Complex64::from_polar(1.0, arg);
        let det = state.log_det();
        let rel = (det.log_abs - log_abs).exp_m1().abs() + (det.phase - exact).norm();
        assert!(rel <= 1e-8, "seed {seed}: {rel:e}");
    }
}

#[test]
fn scaled_product_matches_direct_multiplication() {
    let dist = two_atom();
    let seq = sample_sequence(&dist, 40, 9).unwrap();
    let z = c(0.3, -0.7);
    let mut direct = Mat2::IDENTITY;
    for t in seq.triples() {
        let g = transfer_matrix(t, z).0;
        direct = g * direct;
    }
    let scaled = propagate(&seq, z).unwrap().to_matrix();
    for i in 0..2 {
        for j in 0..2 {
            let d = direct.0[i][j];
            assert!((scaled.0[i][j] - d).norm() <= 1e-10 * d.norm().max(1e-300), "{i}{j}");
        }
    }
}

#[test]
fn recurrence_and_product_agree_at_n_10000() {
    let dist = two_atom();
    for seed in 0..4u64 {
        let seq = sample_sequence(&dist, 10_000, seed).unwrap();
        for z in [c(0.4, 0.1), c(-1.7, 2.2), c(3.0, -0.5)] {
            let pair = solution_pair(&seq, z).unwrap();
            let col = propagate(&seq, z).unwrap().first_column();
            let rel = (pair.log_abs_next - col[0].log_abs).abs() / col[0].log_abs.abs().max(1.0);
            assert!(rel <= 1e-8, "seed {seed}, z {z}: {rel:e}");
            let rel = (pair.log_abs_curr - col[1].log_abs).abs() / col[1].log_abs.abs().max(1.0);
            assert!(rel <= 1e-8);
        }
    }
}

#[test]
fn constant_coefficients_against_power_iteration() {
    // 10^4 steps of the fixed matrix [[3, -1], [1, 0]] on (1, 0), renormalized
    let mut v = [1.0f64, 0.0];
    let mut log = 0.0;
    for _ in 0..10_000 {
        v = [3.0 * v[0] - v[1], v[0]];
        let s = v[0].hypot(v[1]);
        log += s.ln();
        v = [v[0] / s, v[1] / s];
    }
    let oracle = log / 10_000.0;
    assert!((oracle - golden_log()).abs() < 1e-3);
    let seq = sample_sequence(&CoefficientDistribution::single(CoefficientTriple::real(1.0, 0.0, 1.0).unwrap()), 100, 0)
        .unwrap();
    let state = propagate(&seq, c(3.0, 0.0)).unwrap();
    assert!((state.log_norm() / 100.0 - oracle).abs() < 1e-2);
}

#[test]
fn methods_agree_for_two_atom_law() {
    let dist = two_atom();
    for z in [c(0.3, 0.2), c(-1.0, 1.5), c(2.5, -0.5)] {
        let r = lyapunov_via_recurrence(&dist, z, 20_000, 16, 5).unwrap();
        let f = lyapunov_top(&dist, z, 20_000, 16, 5).unwrap();
        let p = lyapunov_pair(&dist, z, 20_000, 16, 5).unwrap();
        let tol = |a: f64, b: f64| 3.0 * a.hypot(b) + 2e-3;
        assert!((r.gamma1 - f.gamma1).abs() <= tol(r.std_error, f.std_error), "{z}: {} {}", r.gamma1, f.gamma1);
        assert!((r.gamma1 - p.gamma1).abs() <= tol(r.std_error, p.std_error), "{z}: {} {}", r.gamma1, p.gamma1);
    }
}

#[test]
fn lower_bound_and_sum_rule() {
    for (k, dist) in two_atom_family().iter().enumerate() {
        let e = exact_log_ratio(dist);
        let z = c(0.3, 0.2);
        let p = lyapunov_pair(dist, z, 10_000, 16, 100 + k as u64).unwrap();
        assert!(p.gamma1 >= 0.5 * e - 3.0 * p.std_error, "law {k}");
        let sigma = p.std_error.hypot(p.std_error_gamma2);
        assert!((p.gamma1 + p.gamma2 - e).abs() <= 3.0 * sigma + 1e-9, "law {k}: {} vs {e}", p.gamma1 + p.gamma2);
        assert!(p.gamma1 >= p.gamma2);
    }
}

#[test]
fn distinct_exponents_for_two_point_support() {
    let p = lyapunov_pair(&two_atom(), c(0.3, 0.2), 10_000, 32, 1).unwrap();
    assert!(p.gap() > 5.0 * p.gap_std_error, "{} ± {}", p.gap(), p.gap_std_error);
}

#[test]
fn hermitian_spectrum_point_methods_agree() {
    let dist = CoefficientDistribution::atoms(vec![
        (triple(c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)), 0.5),
        (triple(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)), 0.5),
    ])
    .unwrap();
    let z = c(0.1, 0.0);
    let r = lyapunov_via_recurrence(&dist, z, 20_000, 16, 3).unwrap();
    let p = lyapunov_pair(&dist, z, 20_000, 16, 3).unwrap();
    assert!((r.gamma1 - p.gamma1).abs() <= 3.0 * r.std_error.hypot(p.std_error) + 2e-3);
}

#[test]
fn shift_covariance_is_bit_identical_for_dyadic_shifts() {
    let shift = c(0.25, -0.5);
    let base = [
        (triple(c(1.0, 0.0), c(0.5, 0.25), c(2.0, 0.0)), 0.5),
        (triple(c(0.75, 0.0), c(-1.0, 0.0), c(1.0, 0.5)), 0.5),
    ];
    let shifted: Vec<_> = base.iter().map(|(t, p)| (t.with_shifted_b(shift), *p)).collect();
    let d0 = CoefficientDistribution::atoms(base.to_vec()).unwrap();
    let d1 = CoefficientDistribution::atoms(shifted).unwrap();
    let z = c(0.125, 1.5);
    for method in [LyapunovMethod::Norm, LyapunovMethod::Furstenberg, LyapunovMethod::Recurrence, LyapunovMethod::QrPair] {
        let a = lyapunov(&d0, z, 2000, 4, 11, method).unwrap();
        let b = lyapunov(&d1, z + shift, 2000, 4, 11, method).unwrap();
        assert_eq!(a, b, "{}", method.tag());
    }
}

#[test]
fn replica_streams_are_independent_of_order() {
    let dist = two_atom();
    let a = sample_replica(&dist, 50, 7, 3).unwrap();
    let _ = sample_replica(&dist, 50, 7, 2).unwrap();
    let b = sample_replica(&dist, 50, 7, 3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn large_deviation_probe_decays() {
    let dist = two_atom();
    let z = c(0.3, 0.2);
    let g = lyapunov(&dist, z, 20_000, 32, 77, LyapunovMethod::Norm).unwrap().gamma1;
    let rates: Vec<f64> = [100usize, 1000, 10_000]
        .iter()
        .map(|&n| large_deviation_probe(&dist, z, n, 0.2, g, 200, 5).unwrap().interval.estimate)
        .collect();
    assert!(rates[1] <= rates[0] && rates[2] <= rates[1], "{rates:?}");
    let far = large_deviation_probe(&dist, z, 10_000, 10.0, g, 50, 5).unwrap();
    assert_eq!(far.exceedances, 0);
}

#[test]
fn angular_decay_identity_holds() {
    let rows = angular_decay_probe(&two_atom(), c(0.3, 0.2), &[200, 400, 800], 0.1, 8, 2).unwrap();
    assert_eq!(rows.len(), 3);
    for p in rows {
        assert!(p.identity_defect < 1e-10, "{}", p.identity_defect);
        assert!(p.log_distance_rate <= 0.0);
    }
}
