#![allow(dead_code)]

use jacobi_spectra_core::ensemble::{CoefficientDistribution, CoefficientTriple};
use jacobi_spectra_core::spectra::JacobiMatrix;
use jacobi_spectra_core::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn triple(a: Complex64, b: Complex64, cc: Complex64) -> CoefficientTriple {
    CoefficientTriple::new(a, b, cc).unwrap()
}

/// Two complex atoms with probability one half each.
pub fn two_atom() -> CoefficientDistribution {
    CoefficientDistribution::atoms(vec![
        (triple(c(1.5, 0.0), c(0.5, 0.5), c(0.75, 0.0)), 0.5),
        (triple(c(0.5, -0.5), c(-1.0, 0.0), c(1.25, 0.0)), 0.5),
    ])
    .unwrap()
}

/// Further two-atom laws with different `E log|a/c|`.
pub fn two_atom_family() -> Vec<CoefficientDistribution> {
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
                .map(|&(a, br, bi, cc)| (triple(c(a, 0.0), c(br, bi), c(cc, 0.0)), 0.5))
                .collect();
            CoefficientDistribution::atoms(atoms).unwrap()
        })
        .collect()
}

/// `E log|a/c|` summed directly over the atoms.
pub fn exact_log_ratio(dist: &CoefficientDistribution) -> f64 {
    match dist {
        CoefficientDistribution::DiscreteAtoms(d) => d
            .atoms()
            .iter()
            .map(|(t, p)| p * (t.a().norm() / t.c().norm()).ln())
            .sum(),
        _ => unreachable!(),
    }
}

/// `log|det A|` and the phase of `det A` by Gaussian elimination with
/// partial pivoting on a dense row-major copy.
pub fn dense_log_det(n: usize, mut a: Vec<Complex64>) -> (f64, Complex64) {
    let mut log_abs = 0.0;
    let mut phase = c(1.0, 0.0);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
            .unwrap();
        if a[p * n + k].norm() == 0.0 {
            return (f64::NEG_INFINITY, c(0.0, 0.0));
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            phase = -phase;
        }
        let pivot = a[k * n + k];
        log_abs += pivot.norm().ln();
        phase *= pivot / pivot.norm();
        for i in k + 1..n {
            let f = a[i * n + k] / pivot;
            if f.norm() == 0.0 {
                continue;
            }
            for j in k..n {
                let v = a[k * n + j];
                a[i * n + j] -= f * v;
            }
        }
    }
    (log_abs, phase)
}

/// `log|det(zI - J)|` through the dense oracle.
pub fn dense_char_poly(j: &JacobiMatrix, z: Complex64) -> (f64, Complex64) {
    let n = j.n();
    let mut a: Vec<Complex64> = j.to_dense().iter().map(|x| -x).collect();
    for i in 0..n {
        a[i * n + i] += z;
    }
    dense_log_det(n, a)
}

/// Distance of `z` to the nearest point of `pts`.
pub fn distance(z: Complex64, pts: &[Complex64]) -> f64 {
    pts.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min)
}

/// Greedy matching of two eigenvalue multisets; returns the largest gap.
pub fn match_spectra(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for z in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, w)| (k, (w - z).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}
