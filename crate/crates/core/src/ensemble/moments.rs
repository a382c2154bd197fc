//! Moment conditions on the coefficient law: the fractional moment sum
//! `E[|a|^δ + |a|^{-δ} + |b|^δ + |c|^δ + |c|^{-δ}]` and the logarithmic
//! moment `E log^{1+δ}(1 + |v|²)` with `v = (a, b, c)`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;


use super::{CoefficientDistribution, CoefficientTriple};
use crate::rng::mix_seed;
use crate::stats::RunningStats;
use crate::{Error, Result};

pub const MOMENT_TERM_NAMES: [&str; 5] = ["|a|^d", "|a|^-d", "|b|^d", "|c|^d", "|c|^-d"];

const MOMENT_STREAM_TAG: u64 = 0x4d6f_6d65_6e74;

/// One expectation in the moment report.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTerm {
    pub value: f64,
    /// Zero for exact values.
    pub std_error: f64,
    /// Running means grew by more than four standard errors of the first
    /// section while increasing monotonically: the expectation is probably
    /// infinite.
    pub divergence_suspected: bool,
    /// `(sample count, running mean)` at `samples/100`, `samples/10`, `samples`.
    pub sectional_means: Vec<(usize, f64)>,
}

impl MomentTerm {
    fn exact(value: f64) -> Self {
        MomentTerm {
            value,
            std_error: 0.0,
            divergence_suspected: !value.is_finite(),
            sectional_means: Vec::new(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && !self.divergence_suspected
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub delta: f64,
    /// In the order of [`MOMENT_TERM_NAMES`].
    pub terms: [MomentTerm; 5],
    pub sum: f64,
    /// `E log^{1+δ}(1 + |v|²)`.
    pub log_moment: MomentTerm,
    /// Values are exact weighted sums (discrete laws only).
    pub exact: bool,
    /// All terms are finite and none is suspected to diverge.
    pub satisfied: bool,
}

fn term_values(t: &CoefficientTriple, delta: f64) -> [f64; 6] {
    let a = t.a().norm();
    let b = t.b().norm();
    let c = t.c().norm();
    [
        a.powf(delta),
        a.powf(-delta),
        b.powf(delta),
        c.powf(delta),
        c.powf(-delta),
        (1.0 + t.norm_sqr()).ln().powf(1.0 + delta),
    ]
}

/// Evaluate the moment conditions for exponent `delta`.
///
/// Discrete laws are evaluated exactly. Other laws use `samples` Monte
/// Carlo draws from a stream derived from `seed`; divergence is flagged
/// by comparing running means at `samples/100`, `samples/10` and `samples`.
pub fn check_moment_condition(
    dist: &CoefficientDistribution,
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<MomentReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let (terms, log_moment, exact) = match dist {
        CoefficientDistribution::DiscreteAtoms(d) => {
            let mut acc = [0.0; 6];
            for (t, p) in d.atoms().iter().filter(|(_, p)| *p > 0.0) {
                for (slot, v) in acc.iter_mut().zip(term_values(t, delta)) {
                    *slot += p * v;
                }
            }
            let terms: [MomentTerm; 5] = core::array::from_fn(|i| MomentTerm::exact(acc[i]));
            (terms, MomentTerm::exact(acc[5]), true)
        }
        _ => {
            if samples < 100 {
                return Err(Error::InvalidArgument(format!(
                    "Monte Carlo moment check needs at least 100 samples, got {samples}"
                )));
            }
            let checkpoints = [samples / 100, samples / 10, samples];
            let mut stats = [RunningStats::new(); 6];
            let mut sections: [Vec<(usize, f64)>; 6] = Default::default();
            let mut first_se = [0.0; 6];
            let stream = dist.stream(mix_seed(seed, MOMENT_STREAM_TAG), 0);
            for (k, t) in stream.take(samples).enumerate() {
                for (s, v) in stats.iter_mut().zip(term_values(&t, delta)) {
                    s.push(v);
                }
                let count = k + 1;
                if checkpoints.contains(&count) {
                    for i in 0..6 {
                        if sections[i].is_empty() {
                            first_se[i] = stats[i].std_error();
                        }
                        sections[i].push((count, stats[i].mean()));
                    }
                }
            }
            let mut build = |i: usize| {
                let means = core::mem::take(&mut sections[i]);
                let m: Vec<f64> = means.iter().map(|&(_, m)| m).collect();
                let growing = m.windows(2).all(|w| w[1] > w[0]);
                let drift = m[m.len() - 1] - m[0];
                MomentTerm {
                    value: stats[i].mean(),
                    std_error: stats[i].std_error(),
                    divergence_suspected: !stats[i].mean().is_finite()
                        || (growing && drift > 4.0 * first_se[i]),
                    sectional_means: means,
                }
            };
            let terms: [MomentTerm; 5] = core::array::from_fn(&mut build);
            let log_moment = build(5);
            (terms, log_moment, false)
        }
    };
    let sum = terms.iter().map(|t| t.value).sum();
    let satisfied = terms.iter().all(MomentTerm::is_finite) && log_moment.is_finite();
    Ok(MomentReport {
        delta,
        terms,
        sum,
        log_moment,
        exact,
        satisfied,
    })
}
