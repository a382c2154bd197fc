use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::matrix::step_coefficients;
use crate::ensemble::{CoefficientSequence, CoefficientTriple};
use crate::scaled::{half_exponent, log2_to_ln, nan_max, pow2, LogComplex};
use crate::{Error, Result};

/// `(f_{n+1}(z), f_n(z))` from `f_0 = 0, f_1 = 1`, in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionPair {
    /// `log|f_{n+1}|`; `-inf` when `z` is an eigenvalue of `J_n`.
    pub log_abs_next: f64,
    /// `log|f_n|`.
    pub log_abs_curr: f64,
    /// `f_{n+1}/|f_{n+1}|`, zero when `f_{n+1} = 0`.
    pub phase_next: Complex64,
    pub phase_curr: Complex64,
    pub steps: usize,
}

impl SolutionPair {
    /// `f_{n+1}` vanished exactly.
    pub fn hit_eigenvalue(&self) -> bool {
        self.log_abs_next == f64::NEG_INFINITY
    }

    pub fn next(&self) -> LogComplex {
        LogComplex {
            log_abs: self.log_abs_next,
            phase: self.phase_next,
        }
    }

    pub fn curr(&self) -> LogComplex {
        LogComplex {
            log_abs: self.log_abs_curr,
            phase: self.phase_curr,
        }
    }

    /// `log ‖(f_{n+1}, f_n)‖`.
    pub fn log_norm(&self) -> f64 {
        let hi = self.log_abs_next.max(self.log_abs_curr);
        let lo = self.log_abs_next.min(self.log_abs_curr);
        hi + 0.5 * (1.0 + (2.0 * (lo - hi)).exp()).ln()
    }

    /// `log d(x, y_n)` with `x = (0, 1)` and `y_n = (f_{n+1}, f_n)`, which
    /// equals `log|f_{n+1}| - log‖y_n‖`.
    pub fn log_angular_distance(&self) -> f64 {
        self.log_abs_next - self.log_norm()
    }
}

/// Run the three-term recurrence over the whole sequence.
pub fn solution_pair(seq: &CoefficientSequence, z: Complex64) -> Result<SolutionPair> {
    solution_pair_iter(seq.triples().iter().copied(), z)
}

pub fn solution_pair_iter(triples: impl IntoIterator<Item = CoefficientTriple>, z: Complex64) -> Result<SolutionPair> {
    let mut prev = Complex64::new(0.0, 0.0);
    let mut curr = Complex64::new(1.0, 0.0);
    let mut log2_scale: i64 = 0;
    let mut steps = 0usize;
    for t in triples {
        let (p, q) = step_coefficients(&t, z);
        let next = p * curr + q * prev;
        prev = curr;
        curr = next;
        steps += 1;
        let m2 = nan_max(curr.norm_sqr(), prev.norm_sqr());
        if !(0.25..=4.0).contains(&m2) {
            if !(m2.is_finite() && m2 > 0.0) {
                return Err(Error::NonFinite { step: steps });
            }
            let k = half_exponent(m2);
            let s = pow2(-k);
            curr *= s;
            prev *= s;
            log2_scale += k as i64;
        }
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("cannot run the recurrence on an empty sequence".into()));
    }
    let next = LogComplex::from_scaled(curr, log2_scale);
    let cur = LogComplex::from_scaled(prev, log2_scale);
    debug_assert!(log2_to_ln(log2_scale).is_finite());
    Ok(SolutionPair {
        log_abs_next: next.log_abs,
        log_abs_curr: cur.log_abs,
        phase_next: next.phase,
        phase_curr: cur.phase,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn t(a: f64, b: f64, c: f64) -> CoefficientTriple {
        CoefficientTriple::real(a, b, c).unwrap()
    }

    #[test]
    fn one_step() {
        let seq = CoefficientSequence::from_triples(vec![t(1., 5., 2.)], 0).unwrap();
        let p = solution_pair(&seq, Complex64::new(7.0, 0.0)).unwrap();
        assert_eq!(p.log_abs_next, 0.0);
        assert_eq!(p.log_abs_curr, 0.0);
        assert_eq!(p.phase_next, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rotation_hits_eigenvalue_then_recovers() {
        // f_0..f_4 = 0, 1, 0, -1, 0
        let seq = CoefficientSequence::from_triples(vec![t(1., 0., 1.); 2], 0).unwrap();
        let p = solution_pair(&seq, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(p.log_abs_next, 0.0);
        assert_eq!(p.phase_next, Complex64::new(-1.0, 0.0));
        assert_eq!(p.log_abs_curr, f64::NEG_INFINITY);
        let seq = CoefficientSequence::from_triples(vec![t(1., 0., 1.); 3], 0).unwrap();
        let p = solution_pair(&seq, Complex64::new(0.0, 0.0)).unwrap();
        assert!(p.hit_eigenvalue());
        assert_eq!(p.log_abs_curr, 0.0);
        assert_eq!(p.phase_curr, Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn log_norm_combines_components() {
        let p = SolutionPair {
            log_abs_next: 3f64.ln(),
            log_abs_curr: 4f64.ln(),
            phase_next: Complex64::new(1.0, 0.0),
            phase_curr: Complex64::new(1.0, 0.0),
            steps: 1,
        };
        assert!((p.log_norm() - 5f64.ln()).abs() < 1e-15);
        assert!((p.log_angular_distance() - 0.6f64.ln()).abs() < 1e-15);
    }
}
