//! Exact power-of-two rescaling and complex numbers kept in
//! log-magnitude form.
//!
//! Transfer products and characteristic polynomials grow like `e^{n γ}`,
//! which leaves the `f64` range after a few thousand steps. Values are
//! therefore carried as a mantissa of modest size times `2^k`, and
//! rescaling only ever multiplies by exact powers of two so it introduces
//! no rounding.

use core::f64::consts::LN_2;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// `2^k` for `k` in the normal exponent range.
#[inline]
pub fn pow2(k: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((k + 1023) as u64) << 52)
}

/// `floor(log2(x))` for finite `x > 0`, including subnormals.
#[inline]
pub fn binary_exponent(x: f64) -> i32 {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i32;
    if e == 0 {
        // subnormal: renormalize through an exact multiplication
        binary_exponent(x * pow2(64)) - 64
    } else {
        e - 1023
    }
}

/// Exponent `k` such that `m2 · 4^{-k}` lies in `[1, 4)`, where `m2` is a
/// squared magnitude. Scaling a value by `2^{-k}` then puts its magnitude
/// in `[1, 2)`.
#[inline]
pub fn half_exponent(m2: f64) -> i32 {
    binary_exponent(m2).div_euclid(2)
}

/// Maximum that propagates NaN from either argument.
#[inline]
pub fn nan_max(a: f64, b: f64) -> f64 {
    if a >= b || a.is_nan() {
        a
    } else {
        b
    }
}

/// Convert an accumulated binary exponent into natural-log units.
#[inline]
pub fn log2_to_ln(k: i64) -> f64 {
    k as f64 * LN_2
}

/// A complex number `exp(log_abs) · phase` with `|phase| = 1`.
/// Zero is `log_abs = -inf`, `phase = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_abs: f64,
    pub phase: Complex64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_abs: f64::NEG_INFINITY,
        phase: Complex64::new(0.0, 0.0),
    };

    pub const ONE: LogComplex = LogComplex {
        log_abs: 0.0,
        phase: Complex64::new(1.0, 0.0),
    };

    pub fn from_complex(z: Complex64) -> Self {
        let r = z.norm();
        if r == 0.0 {
            Self::ZERO
        } else {
            LogComplex {
                log_abs: r.ln(),
                phase: z / r,
            }
        }
    }

    /// `mantissa · 2^exp2` without forming the (possibly overflowing) value.
    pub fn from_scaled(mantissa: Complex64, exp2: i64) -> Self {
        let mut v = Self::from_complex(mantissa);
        if v.log_abs.is_finite() {
            v.log_abs += log2_to_ln(exp2);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    pub fn mul(self, other: LogComplex) -> LogComplex {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        LogComplex {
            log_abs: self.log_abs + other.log_abs,
            phase: renormalize(self.phase * other.phase),
        }
    }

    pub fn neg(self) -> LogComplex {
        LogComplex {
            log_abs: self.log_abs,
            phase: -self.phase,
        }
    }

    /// Sum of terms, computed relative to the largest magnitude.
    pub fn sum(terms: &[LogComplex]) -> LogComplex {
        let top = terms
            .iter()
            .map(|t| t.log_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let acc: Complex64 = terms
            .iter()
            .filter(|t| !t.is_zero())
            .map(|t| t.phase * (t.log_abs - top).exp())
            .sum();
        let mut out = Self::from_complex(acc);
        if !out.is_zero() {
            out.log_abs += top;
        }
        out
    }

    /// The plain complex value; overflows to infinity for huge magnitudes.
    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            self.phase * self.log_abs.exp()
        }
    }
}

#[inline]
fn renormalize(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        z
    } else {
        z / r
    }
}
