//! Implicit QL iteration for complex symmetric tridiagonal matrices.
//!
//! The Dirichlet characteristic polynomial depends on the off-diagonals only
//! through the products `a_{j+1} c_j`, so `J_n` has the same eigenvalues as
//! the complex symmetric matrix with off-diagonal `sqrt(a_{j+1} c_j)`.
//! Complex orthogonal rotations are not unitary; a rotation whose entries
//! grow beyond `GROWTH_LIMIT` abandons the sweep and retries with another
//! shift.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::{Boundary, JacobiMatrix};
use crate::{Error, Result};

const GROWTH_LIMIT: f64 = 1e3;
const EXCEPTIONAL_PERIOD: usize = 10;

pub(super) fn eigenvalues(j: &JacobiMatrix) -> Result<Vec<Complex64>> {
    debug_assert!(matches!(j.boundary(), Boundary::Dirichlet));
    let mut d: Vec<Complex64> = j.diag().to_vec();
    let mut e: Vec<Complex64> = j
        .sub()
        .iter()
        .zip(j.sup())
        .map(|(a, c)| (a * c).sqrt())
        .collect();
    e.push(Complex64::new(0.0, 0.0));
    let real = d.iter().chain(&e).all(|x| x.im == 0.0);
    ql(&mut d, &mut e, real)?;
    Ok(d)
}

fn deflatable(e: Complex64, d0: Complex64, d1: Complex64) -> bool {
    e.norm() <= f64::EPSILON * (d0.norm() + d1.norm()) || e == Complex64::new(0.0, 0.0)
}

/// `d` holds the diagonal, `e[i]` couples `i` and `i + 1`; `e[n-1]` is unused.
fn ql(d: &mut [Complex64], e: &mut [Complex64], real: bool) -> Result<()> {
    let n = d.len();
    let cap = 40 * n.max(1);
    let mut total = 0usize;
    let mut saved_d = Vec::new();
    let mut saved_e = Vec::new();
    for l in 0..n {
        let mut iter = 0usize;
        let mut force_exceptional = false;
        loop {
            let mut m = l;
            while m + 1 < n && !deflatable(e[m], d[m], d[m + 1]) {
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total += 1;
            if total > cap {
                return Err(Error::NoConvergence { index: l, iterations: total });
            }
            let shift = if force_exceptional || iter % EXCEPTIONAL_PERIOD == 0 {
                exceptional_shift(d[l], e[l], iter, real)
            } else {
                wilkinson_shift(d[l], e[l], d[l + 1])
            };
            saved_d.clear();
            saved_d.extend_from_slice(&d[l..=m]);
            saved_e.clear();
            saved_e.extend_from_slice(&e[l..=m]);
            force_exceptional = !sweep(d, e, l, m, shift);
            if force_exceptional {
                d[l..=m].copy_from_slice(&saved_d);
                e[l..=m].copy_from_slice(&saved_e);
            }
        }
    }
    Ok(())
}

/// Eigenvalue of `[[d0, e], [e, d1]]` closer to `d0`.
fn wilkinson_shift(d0: Complex64, e: Complex64, d1: Complex64) -> Complex64 {
    let g = (d1 - d0) / (e * 2.0);
    let r = (g * g + 1.0).sqrt();
    let r = if (g.conj() * r).re >= 0.0 { r } else { -r };
    d0 - e / (g + r)
}

fn exceptional_shift(d0: Complex64, e: Complex64, iter: usize, real: bool) -> Complex64 {
    let k = (iter / EXCEPTIONAL_PERIOD) as f64 + 1.0;
    let scale = 0.75 * e.norm();
    if real {
        let sign = if iter % 2 == 0 { 1.0 } else { -1.0 };
        d0 + scale * sign * (1.0 + 0.1 * k)
    } else {
        d0 + Complex64::from_polar(scale, 2.399_963 * k)
    }
}

/// One implicit QL sweep on the block `l..=m`. Returns false when a rotation
/// grew too large; the block is then left half-updated for the caller to
/// restore.
fn sweep(d: &mut [Complex64], e: &mut [Complex64], l: usize, m: usize, shift: Complex64) -> bool {
    let zero = Complex64::new(0.0, 0.0);
    let mut g = d[m] - shift;
    let mut s = Complex64::new(1.0, 0.0);
    let mut c = Complex64::new(1.0, 0.0);
    let mut p = zero;
    let mut i = m;
    while i > l {
        i -= 1;
        let f = s * e[i];
        let b = c * e[i];
        let r = (f * f + g * g).sqrt();
        e[i + 1] = r;
        if r == zero {
            if f == zero && g == zero {
                // exact underflow: the block splits at i + 1
                d[i + 1] -= p;
                e[m] = zero;
                return true;
            }
            return false;
        }
        s = f / r;
        c = g / r;
        if s.norm() > GROWTH_LIMIT || c.norm() > GROWTH_LIMIT || !(s.is_finite() && c.is_finite()) {
            return false;
        }
        g = d[i + 1] - p;
        let t = (d[i] - g) * s + c * b * 2.0;
        p = s * t;
        d[i + 1] = g + p;
        g = c * t - b;
    }
    d[l] -= p;
    e[l] = g;
    e[m] = zero;
    true
}
