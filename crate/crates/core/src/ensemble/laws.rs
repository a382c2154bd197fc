#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// A law on the real line used by the Hatano–Nelson generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RealLaw {
    Constant(f64),
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, std_dev: f64 },
}

impl RealLaw {
    pub fn validate(&self, what: &str) -> Result<()> {
        let ok = match *self {
            RealLaw::Constant(x) => x.is_finite(),
            RealLaw::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
            RealLaw::Normal { mean, std_dev } => {
                mean.is_finite() && std_dev.is_finite() && std_dev >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDistribution(format!(
                "{what}: malformed law {self:?}"
            )))
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            RealLaw::Constant(x) => x,
            RealLaw::Uniform { low, high } => {
                if low == high {
                    low
                } else {
                    rng.random_range(low..high)
                }
            }
            RealLaw::Normal { mean, std_dev } => {
                let g: f64 = rng.sample(StandardNormal);
                mean + std_dev * g
            }
        }
    }

    /// True when the law is a point mass.
    pub fn is_degenerate(&self) -> bool {
        match *self {
            RealLaw::Constant(_) => true,
            RealLaw::Uniform { low, high } => low == high,
            RealLaw::Normal { std_dev, .. } => std_dev == 0.0,
        }
    }

    /// True when every draw is strictly positive.
    pub fn has_positive_support(&self) -> bool {
        match *self {
            RealLaw::Constant(x) => x > 0.0,
            RealLaw::Uniform { low, .. } => low > 0.0,
            RealLaw::Normal { mean, std_dev } => std_dev == 0.0 && mean > 0.0,
        }
    }
}

/// Generator parameters for the Hatano–Nelson class
/// `b_j ∈ ℝ`, `conj(a_{j+1}) / c_j > 0`.
///
/// Each step draws `b_j` from `onsite`, `c_j = c_modulus · e^{i c_phase}`
/// and a ratio `ρ_j > 0` from `ratio`, then sets
/// `a_{j+1} = conj(ρ_j c_j)`. `a_1` comes from one extra independent
/// `(c, ρ)` draw, since the class only constrains adjacent pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatanoNelsonParams {
    pub onsite: RealLaw,
    pub ratio: RealLaw,
    pub c_modulus: RealLaw,
    pub c_phase: RealLaw,
}

impl HatanoNelsonParams {
    pub fn new(onsite: RealLaw, ratio: RealLaw, c_modulus: RealLaw, c_phase: RealLaw) -> Result<Self> {
        let p = HatanoNelsonParams {
            onsite,
            ratio,
            c_modulus,
            c_phase,
        };
        p.validate()?;
        Ok(p)
    }

    /// Constant asymmetric hopping `a_j = e^{g}`, `c_j = e^{-g}` with the
    /// given on-site law.
    pub fn asymmetric_hopping(g: f64, onsite: RealLaw) -> Result<Self> {
        Self::new(
            onsite,
            RealLaw::Constant((2.0 * g).exp()),
            RealLaw::Constant((-g).exp()),
            RealLaw::Constant(0.0),
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.onsite.validate("onsite")?;
        self.ratio.validate("ratio")?;
        self.c_modulus.validate("c_modulus")?;
        self.c_phase.validate("c_phase")?;
        if !self.ratio.has_positive_support() {
            return Err(Error::InvalidDistribution(
                "ratio law must be supported in (0, inf) to stay in the Hatano-Nelson class".into(),
            ));
        }
        if !self.c_modulus.has_positive_support() {
            return Err(Error::InvalidDistribution(
                "c_modulus law must be supported in (0, inf) so that c != 0".into(),
            ));
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        self.onsite.is_degenerate()
            && self.ratio.is_degenerate()
            && self.c_modulus.is_degenerate()
            && self.c_phase.is_degenerate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn positive_support_rules() {
        assert!(RealLaw::Constant(2.0).has_positive_support());
        assert!(!RealLaw::Uniform { low: 0.0, high: 1.0 }.has_positive_support());
        assert!(RealLaw::Uniform { low: 0.1, high: 1.0 }.has_positive_support());
        assert!(!RealLaw::Normal { mean: 5.0, std_dev: 1.0 }.has_positive_support());
    }

    #[test]
    fn rejects_non_positive_ratio_law() {
        let err = HatanoNelsonParams::new(
            RealLaw::Constant(0.0),
            RealLaw::Uniform { low: -1.0, high: 1.0 },
            RealLaw::Constant(1.0),
            RealLaw::Constant(0.0),
        );
        assert!(matches!(err, Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn uniform_draws_stay_in_range() {
        let law = RealLaw::Uniform { low: -1.0, high: 1.0 };
        let mut rng = substream(3, 0);
        for _ in 0..1000 {
            let x = law.sample(&mut rng);
            assert!((-1.0..1.0).contains(&x));
        }
    }
}
