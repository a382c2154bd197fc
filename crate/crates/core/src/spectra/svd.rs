//! One-sided (Hestenes) Jacobi SVD, cyclic by rows.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::JacobiMatrix;
use crate::{Error, Result};

/// A column pair is treated as orthogonal once
/// `|a_p^H a_q| <= SVD_TOLERANCE · ‖a_p‖ ‖a_q‖`.
pub const SVD_TOLERANCE: f64 = 1e-12;

/// Maximum number of sweeps before giving up.
pub const SVD_SWEEP_CAP: usize = 40;

/// Singular values with the accumulated right rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiSvd {
    /// Descending.
    pub singular_values: Vec<f64>,
    /// Column-major `n × n` product of all rotations, or empty.
    pub v: Vec<Complex64>,
    pub sweeps: usize,
}

impl JacobiSvd {
    /// `max |(V^H V - I)_{ij}|`, or `NaN` without `V`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.singular_values.len();
        if self.v.len() != n * n {
            return f64::NAN;
        }
        let mut worst: f64 = 0.0;
        for p in 0..n {
            for q in p..n {
                let s: Complex64 = (0..n).map(|i| self.v[p * n + i].conj() * self.v[q * n + i]).sum();
                let target = if p == q { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }
}

/// Singular values of `j`, descending.
pub fn singular_values(j: &JacobiMatrix) -> Result<Vec<f64>> {
    Ok(jacobi(j, false)?.singular_values)
}

/// Singular values together with the accumulated rotations.
pub fn svd_with_vectors(j: &JacobiMatrix) -> Result<JacobiSvd> {
    jacobi(j, true)
}

/// Columns stored split into real and imaginary parts so the inner loops
/// vectorize.
struct Columns {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Columns {
    fn col(&self, p: usize) -> (&[f64], &[f64]) {
        let r = p * self.n..(p + 1) * self.n;
        (&self.re[r.clone()], &self.im[r])
    }

    fn norm_sqr(&self, p: usize) -> f64 {
        let (r, i) = self.col(p);
        dot_real(r, r) + dot_real(i, i)
    }

    /// `a_p^H a_q`.
    fn inner(&self, p: usize, q: usize) -> Complex64 {
        let (pr, pi) = self.col(p);
        let (qr, qi) = self.col(q);
        Complex64::new(dot_real(pr, qr) + dot_real(pi, qi), dot_real(pr, qi) - dot_real(pi, qr))
    }

    /// `a_p <- c a_p - s e^{-iφ} a_q`, `a_q <- s e^{iφ} a_p + c a_q`.
    fn rotate(&mut self, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
        let n = self.n;
        debug_assert!(p < q);
        let (lo_re, hi_re) = self.re.split_at_mut(q * n);
        let (lo_im, hi_im) = self.im.split_at_mut(q * n);
        let pr = &mut lo_re[p * n..(p + 1) * n];
        let pi = &mut lo_im[p * n..(p + 1) * n];
        let qr = &mut hi_re[..n];
        let qi = &mut hi_im[..n];
        let (wr, wi) = (s * phase.re, s * phase.im);
        for k in 0..n {
            let (ar, ai, br, bi) = (pr[k], pi[k], qr[k], qi[k]);
            // e^{-iφ} b = (wr br + wi bi) + i (wr bi - wi br), scaled by s
            pr[k] = c * ar - (wr * br + wi * bi);
            pi[k] = c * ai - (wr * bi - wi * br);
            qr[k] = (wr * ar - wi * ai) + c * br;
            qi[k] = (wr * ai + wi * ar) + c * bi;
        }
    }
}

fn dot_real(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let xc = x.chunks_exact(4);
    let yc = y.chunks_exact(4);
    let tail: f64 = xc.remainder().iter().zip(yc.remainder()).map(|(a, b)| a * b).sum();
    for (a, b) in xc.zip(yc) {
        for k in 0..4 {
            acc[k] += a[k] * b[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn jacobi(j: &JacobiMatrix, want_v: bool) -> Result<JacobiSvd> {
    let n = j.n();
    let mut a = Columns {
        n,
        re: alloc::vec![0.0; n * n],
        im: alloc::vec![0.0; n * n],
    };
    for col in 0..n {
        for row in 0..n {
            let x = j.get(row, col);
            a.re[col * n + row] = x.re;
            a.im[col * n + row] = x.im;
        }
    }
    let mut v = if want_v {
        let mut v = Columns {
            n,
            re: alloc::vec![0.0; n * n],
            im: alloc::vec![0.0; n * n],
        };
        for k in 0..n {
            v.re[k * n + k] = 1.0;
        }
        Some(v)
    } else {
        None
    };
    let mut norms: Vec<f64> = (0..n).map(|p| a.norm_sqr(p)).collect();
    let mut sweeps = 0;
    loop {
        if sweeps == SVD_SWEEP_CAP {
            return Err(Error::SvdNoConvergence { sweeps });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = a.inner(p, q);
                let g = gamma.norm();
                if g <= SVD_TOLERANCE * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                a.rotate(p, q, c, s, phase);
                if let Some(v) = v.as_mut() {
                    v.rotate(p, q, c, s, phase);
                }
                norms[p] = alpha - t * g;
                norms[q] = beta + t * g;
            }
        }
        // refresh to stop drift in the updated norms
        for (p, norm) in norms.iter_mut().enumerate() {
            *norm = a.norm_sqr(p);
        }
        if !rotated {
            break;
        }
    }
    let mut singular_values: Vec<f64> = norms.iter().map(|x| x.sqrt()).collect();
    singular_values.sort_by(|x, y| y.total_cmp(x));
    let v = match v {
        Some(v) => v.re.iter().zip(&v.im).map(|(&r, &i)| Complex64::new(r, i)).collect(),
        None => Vec::new(),
    };
    Ok(JacobiSvd {
        singular_values,
        v,
        sweeps,
    })
}
