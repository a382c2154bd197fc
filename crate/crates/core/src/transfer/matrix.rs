use core::ops::Mul;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::ensemble::{CoefficientSequence, CoefficientTriple};
use crate::scaled::{half_exponent, log2_to_ln, nan_max, pow2, LogComplex};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub type Vec2 = [Complex64; 2];

/// Dense 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm_sqr()).sum()
    }

    pub fn max_entry_sqr(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm_sqr()).fold(0.0, nan_max)
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|x| *x *= s);
        out
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// `g_j = [[(z - b)/c, -a/c], [1, 0]]`, advancing `(f_j, f_{j-1})` to
/// `(f_{j+1}, f_j)`. Its determinant is `a/c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix(pub Mat2);

impl TransferMatrix {
    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn det(&self) -> Complex64 {
        self.0.det()
    }
}

pub fn transfer_matrix(t: &CoefficientTriple, z: Complex64) -> TransferMatrix {
    let (p, q) = step_coefficients(t, z);
    TransferMatrix(Mat2([[p, q], [ONE, ZERO]]))
}

/// First-row entries `((z - b)/c, -a/c)` of `g_j`.
#[inline]
pub(crate) fn step_coefficients(t: &CoefficientTriple, z: Complex64) -> (Complex64, Complex64) {
    let inv_c = t.c().inv();
    ((z - t.b()) * inv_c, -t.a() * inv_c)
}

/// `S_n(z)` stored as `2^{log2_scale} · unit` with the largest entry
/// modulus of `unit` kept in `[1/2, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledTransferState {
    unit: Mat2,
    log2_scale: i64,
    steps: usize,
    /// `det S_n = ∏ a_j / c_j`, accumulated factor by factor because the
    /// determinant of `unit` loses relative accuracy like `e^{-2nγ}`.
    det_mantissa: Complex64,
    det_log2_scale: i64,
}

impl Default for ScaledTransferState {
    fn default() -> Self {
        Self::new()
    }
}

impl ScaledTransferState {
    /// The empty product (identity).
    pub fn new() -> Self {
        ScaledTransferState {
            unit: Mat2::IDENTITY,
            log2_scale: 0,
            steps: 0,
            det_mantissa: ONE,
            det_log2_scale: 0,
        }
    }

    pub fn unit_part(&self) -> &Mat2 {
        &self.unit
    }

    /// Natural log of the accumulated scale factor.
    pub fn log_scale(&self) -> f64 {
        log2_to_ln(self.log2_scale)
    }

    pub fn step_count(&self) -> usize {
        self.steps
    }

    /// `log ‖S_n‖_F`.
    pub fn log_norm(&self) -> f64 {
        self.log_scale() + 0.5 * self.unit.frobenius_sqr().ln()
    }

    /// `det S_n` in log form, as the product of the factors' determinants.
    pub fn log_det(&self) -> LogComplex {
        LogComplex::from_scaled(self.det_mantissa, self.det_log2_scale)
    }

    /// `det S_n` evaluated from the entries of the scaled product. Only
    /// accurate while `S_n` is well conditioned.
    pub fn log_det_from_entries(&self) -> LogComplex {
        LogComplex::from_scaled(self.unit.det(), 2 * self.log2_scale)
    }

    /// `S_n (1, 0)^T = (f_{n+1}, f_n)` in log form.
    pub fn first_column(&self) -> [LogComplex; 2] {
        [
            LogComplex::from_scaled(self.unit.0[0][0], self.log2_scale),
            LogComplex::from_scaled(self.unit.0[1][0], self.log2_scale),
        ]
    }

    /// The product as a plain matrix; overflows for long products.
    pub fn to_matrix(&self) -> Mat2 {
        let mut m = self.unit;
        let s = log2_to_ln(self.log2_scale).exp();
        m.0.iter_mut().flatten().for_each(|x| *x *= s);
        m
    }

    /// Left-multiply by `g(t, z)`.
    pub fn step(&mut self, t: &CoefficientTriple, z: Complex64) -> Result<()> {
        let (p, q) = step_coefficients(t, z);
        let u = &mut self.unit.0;
        let top = [p * u[0][0] + q * u[1][0], p * u[0][1] + q * u[1][1]];
        u[1] = u[0];
        u[0] = top;
        self.steps += 1;
        self.det_mantissa *= -q;
        let d2 = self.det_mantissa.norm_sqr();
        if !(1e-60..=1e60).contains(&d2) && d2.is_finite() && d2 > 0.0 {
            let k = half_exponent(d2);
            self.det_mantissa *= pow2(-k);
            self.det_log2_scale += k as i64;
        }
        self.renormalize()
    }

    fn renormalize(&mut self) -> Result<()> {
        let m2 = self.unit.max_entry_sqr();
        if (0.25..=4.0).contains(&m2) {
            return Ok(());
        }
        if !(m2.is_finite() && m2 > 0.0) {
            return Err(Error::NonFinite { step: self.steps });
        }
        let k = half_exponent(m2);
        let s = pow2(-k);
        self.unit.0.iter_mut().flatten().for_each(|x| *x *= s);
        self.log2_scale += k as i64;
        Ok(())
    }
}

/// Scaled `S_n(z)` for the whole sequence.
pub fn propagate(seq: &CoefficientSequence, z: Complex64) -> Result<ScaledTransferState> {
    propagate_iter(seq.triples().iter().copied(), z)
}

pub fn propagate_iter(triples: impl IntoIterator<Item = CoefficientTriple>, z: Complex64) -> Result<ScaledTransferState> {
    let mut state = ScaledTransferState::new();
    for t in triples {
        state.step(&t, z)?;
    }
    if state.steps == 0 {
        return Err(Error::InvalidArgument("cannot propagate an empty sequence".into()));
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: f64, b: f64, c: f64) -> CoefficientTriple {
        CoefficientTriple::real(a, b, c).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn transfer_matrix_entries() {
        let g = transfer_matrix(&t(1., 0., 1.), c(0.0));
        assert_eq!(g.0, Mat2([[c(0.0), c(-1.0)], [c(1.0), c(0.0)]]));
        let g = transfer_matrix(&t(1., 0., 1.), c(2.0));
        assert_eq!(g.0, Mat2([[c(2.0), c(-1.0)], [c(1.0), c(0.0)]]));
        let g = transfer_matrix(&t(3., 1., 2.), Complex64::new(0.7, -2.0));
        assert!((g.det() - c(1.5)).norm() <= 1e-14 * 1.5);
    }

    #[test]
    fn single_step_state() {
        let seq = CoefficientSequence::from_triples(alloc::vec![t(1., 0., 1.)], 0).unwrap();
        let s = propagate(&seq, c(0.0)).unwrap();
        assert_eq!(*s.unit_part(), Mat2([[c(0.0), c(-1.0)], [c(1.0), c(0.0)]]));
        assert_eq!(s.log_scale(), 0.0);
        assert_eq!(s.step_count(), 1);
    }

    #[test]
    fn scaled_product_matches_direct_product() {
        let triples = [t(1.5, 0.2, 0.7), t(0.4, -1.0, 2.0), t(2.0, 0.5, 1.1), t(0.9, 0.0, 0.3)];
        let z = Complex64::new(3.5, 1.25);
        let mut direct = Mat2::IDENTITY;
        for tr in triples.iter().cycle().take(12) {
            direct = transfer_matrix(tr, z).0 * direct;
        }
        let s = propagate_iter(triples.iter().cycle().take(12).copied(), z).unwrap();
        assert!(s.log_scale() != 0.0);
        let m = s.to_matrix();
        let scale = direct.frobenius_sqr().sqrt();
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.0[i][j] - direct.0[i][j]).norm() <= 1e-10 * scale);
            }
        }
        let m2 = s.unit_part().max_entry_sqr();
        assert!((0.25..=4.0).contains(&m2));
    }

    #[test]
    fn nan_input_reports_step() {
        let z = Complex64::new(f64::NAN, 0.0);
        let err = propagate_iter([t(1., 0., 1.); 3], z).unwrap_err();
        assert_eq!(err, Error::NonFinite { step: 1 });
    }
}
