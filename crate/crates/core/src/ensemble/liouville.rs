use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{CoefficientSequence, CLASS_TOLERANCE};
use crate::{Error, Result};

/// Symmetrizing change of variables `f_j = θ_j ψ_j` for a Hatano–Nelson
/// sequence.
///
/// With `ρ_j = conj(a_{j+1}) / c_j > 0`, the new hopping is
/// `s_j = c_j ρ_j^{1/2}` and `θ_1 = 1`, `θ_k = (ρ_1 ⋯ ρ_{k-1})^{1/2}`.
/// `ψ` then solves `conj(s_{j-1}) ψ_{j-1} + b_j ψ_j + s_j ψ_{j+1} = z ψ_j`.
/// The weights grow geometrically, so they are stored as logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleTransform {
    /// `s_1 … s_{n-1}`.
    pub s: Vec<Complex64>,
    /// `log θ_1 … log θ_n`.
    pub log_theta: Vec<f64>,
}

impl LiouvilleTransform {
    /// `θ_k` for 1-based `k`; may overflow to infinity for long sequences.
    pub fn theta(&self, k: usize) -> f64 {
        self.log_theta[k - 1].exp()
    }
}

pub fn liouville_transform(seq: &CoefficientSequence) -> Result<LiouvilleTransform> {
    let t = seq.triples();
    let n = t.len();
    let mut s = Vec::with_capacity(n.saturating_sub(1));
    let mut log_theta = Vec::with_capacity(n);
    log_theta.push(0.0);
    for j in 0..n.saturating_sub(1) {
        if t[j].b().im.abs() > CLASS_TOLERANCE * t[j].b().norm().max(1.0) {
            return Err(Error::NotHatanoNelson {
                index: j,
                reason: "b is not real",
            });
        }
        let ratio = t[j + 1].a().conj() / t[j].c();
        if !(ratio.re > 0.0 && ratio.im.abs() <= CLASS_TOLERANCE * ratio.norm()) {
            return Err(Error::NotHatanoNelson {
                index: j,
                reason: "conj(a_{j+1}) / c_j is not a positive real",
            });
        }
        // principal root of a positive real
        let root = ratio.re.sqrt();
        s.push(t[j].c() * root);
        let prev = log_theta[j];
        log_theta.push(prev + 0.5 * ratio.re.ln());
    }
    Ok(LiouvilleTransform { s, log_theta })
}
