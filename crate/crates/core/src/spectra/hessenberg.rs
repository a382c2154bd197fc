//! Balancing, Householder reduction and single-shift complex QR for the
//! eigenvalues of a general (here: periodic or tridiagonal) matrix.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{Boundary, JacobiMatrix};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const BALANCE_PASSES: usize = 100;

/// Square row-major complex matrix.
pub(super) struct Dense {
    n: usize,
    a: Vec<Complex64>,
}

impl Dense {
    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }
    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.a[i * self.n + j]
    }
}

pub(super) fn eigenvalues(j: &JacobiMatrix) -> Result<Vec<Complex64>> {
    let n = j.n();
    let mut h = Dense { n, a: j.to_dense() };
    balance(&mut h);
    if matches!(j.boundary(), Boundary::Periodic { .. }) {
        reduce_to_hessenberg(&mut h);
    }
    hessenberg_qr(&mut h)
}

fn l1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity by powers of two equalizing off-diagonal row and
/// column norms, repeated until no scaling changes.
pub(super) fn balance(h: &mut Dense) {
    let n = h.n;
    for _ in 0..BALANCE_PASSES {
        let mut changed = false;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for k in 0..n {
                if k != i {
                    c += l1(h.at(k, i));
                    r += l1(h.at(i, k));
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while c >= g {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                changed = true;
                let inv = 1.0 / f;
                for k in 0..n {
                    *h.at_mut(i, k) *= inv;
                    *h.at_mut(k, i) *= f;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Householder reduction to upper Hessenberg form.
pub(super) fn reduce_to_hessenberg(h: &mut Dense) {
    let n = h.n;
    let mut v = alloc::vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let tail: f64 = (k + 2..n).map(|i| h.at(i, k).norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = h.at(k + 1, k);
        let norm = (tail + x0.norm_sqr()).sqrt();
        let phase = if x0 == ZERO { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = h.at(i, k);
        }
        let vnorm2: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
        let beta = 2.0 / vnorm2;
        // H <- (I - beta v v^H) H
        for col in k..n {
            let mut s = ZERO;
            for i in k + 1..n {
                s += v[i].conj() * h.at(i, col);
            }
            s *= beta;
            for i in k + 1..n {
                *h.at_mut(i, col) -= v[i] * s;
            }
        }
        // H <- H (I - beta v v^H)
        for row in 0..n {
            let mut s = ZERO;
            for i in k + 1..n {
                s += h.at(row, i) * v[i];
            }
            s *= beta;
            for i in k + 1..n {
                *h.at_mut(row, i) -= s * v[i].conj();
            }
        }
        *h.at_mut(k + 1, k) = alpha;
        for i in k + 2..n {
            *h.at_mut(i, k) = ZERO;
        }
    }
}

/// Unitary rotation `[[c, s], [-conj(s), c]]` with real `c` mapping
/// `(x, y)` to `(ρ x/|x|, 0)`.
#[inline]
fn rotation(x: Complex64, y: Complex64) -> (f64, Complex64) {
    if y == ZERO {
        return (1.0, ZERO);
    }
    if x == ZERO {
        return (0.0, y.conj() / y.norm());
    }
    let ax = x.norm();
    let rho = ax.hypot(y.norm());
    (ax / rho, (x / ax) * y.conj() / rho)
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift QR with
/// Wilkinson shifts, exceptional shifts after 10 and 20 stalled
/// iterations, and at most `40 n` iterations overall.
pub(super) fn hessenberg_qr(h: &mut Dense) -> Result<Vec<Complex64>> {
    let n = h.n;
    let mut eig = alloc::vec![ZERO; n];
    if n == 0 {
        return Ok(eig);
    }
    let norm_scale = h.a.iter().map(|x| x.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let cap = 40 * n;
    let mut total = 0usize;
    let mut hi = n - 1;
    loop {
        let mut its = 0usize;
        loop {
            // find the start of the active block
            let mut l = hi;
            while l > 0 {
                let sub = h.at(l, l - 1).norm();
                let mut diag = h.at(l - 1, l - 1).norm() + h.at(l, l).norm();
                if diag == 0.0 {
                    diag = norm_scale;
                }
                if sub <= f64::EPSILON * diag {
                    *h.at_mut(l, l - 1) = ZERO;
                    break;
                }
                l -= 1;
            }
            if l == hi {
                eig[hi] = h.at(hi, hi);
                break;
            }
            its += 1;
            total += 1;
            if total > cap {
                return Err(Error::NoConvergence { index: hi, iterations: total });
            }
            let shift = if its == 10 || its == 20 {
                h.at(hi, hi) + 0.75 * h.at(hi, hi - 1).norm()
            } else {
                wilkinson(h.at(hi - 1, hi - 1), h.at(hi - 1, hi), h.at(hi, hi - 1), h.at(hi, hi))
            };
            qr_sweep(h, l, hi, shift);
        }
        if hi == 0 {
            break;
        }
        hi -= 1;
    }
    Ok(eig)
}

/// Eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let r1 = d + half + disc;
    let r2 = d + half - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

fn qr_sweep(h: &mut Dense, l: usize, hi: usize, shift: Complex64) {
    let n = h.n;
    let mut x = h.at(l, l) - shift;
    let mut y = h.at(l + 1, l);
    for k in l..hi {
        if k > l {
            x = h.at(k, k - 1);
            y = h.at(k + 1, k - 1);
        }
        let (c, s) = rotation(x, y);
        let start = if k > l { k - 1 } else { l };
        // rows k, k+1
        for col in start..=hi {
            let h1 = h.a[k * n + col];
            let h2 = h.a[(k + 1) * n + col];
            h.a[k * n + col] = h1 * c + s * h2;
            h.a[(k + 1) * n + col] = h2 * c - s.conj() * h1;
        }
        if k > l {
            *h.at_mut(k + 1, k - 1) = ZERO;
        }
        // columns k, k+1
        let end = (k + 2).min(hi);
        for row in l..=end {
            let h1 = h.a[row * n + k];
            let h2 = h.a[row * n + k + 1];
            h.a[row * n + k] = h1 * c + s.conj() * h2;
            h.a[row * n + k + 1] = h2 * c - s * h1;
        }
    }
}
