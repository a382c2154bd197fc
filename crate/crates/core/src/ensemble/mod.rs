//! Coefficient laws for the three-term recurrence and reproducible
//! sampling of i.i.d. coefficient sequences.

mod laws;
mod liouville;
mod moments;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::format;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, RngCore};

use crate::rng::{mix_seed, substream, StreamRng};
use crate::stats::RunningStats;
use crate::{Error, Result};

pub use laws::{HatanoNelsonParams, RealLaw};
pub use liouville::{liouville_transform, LiouvilleTransform};
pub use moments::{check_moment_condition, MomentReport, MomentTerm, MOMENT_TERM_NAMES};

/// Relative tolerance for the Hatano–Nelson class predicate.
pub const CLASS_TOLERANCE: f64 = 1e-12;

/// Tolerance on the total probability of a discrete law.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// One coefficient vector `(a_j, b_j, c_j)`; `a` and `c` are nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientTriple {
    a: Complex64,
    b: Complex64,
    c: Complex64,
}

impl CoefficientTriple {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidTriple("entries must be finite"));
        }
        if a == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidTriple("a must be nonzero"));
        }
        if c == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidTriple("c must be nonzero"));
        }
        Ok(CoefficientTriple { a, b, c })
    }

    pub fn real(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into())
    }

    /// Triples produced by a user sampler are only checked when a
    /// sequence is materialized.
    pub(crate) fn unchecked(a: Complex64, b: Complex64, c: Complex64) -> Self {
        CoefficientTriple { a, b, c }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }
    pub fn b(&self) -> Complex64 {
        self.b
    }
    pub fn c(&self) -> Complex64 {
        self.c
    }

    /// `|v|² = |a|² + |b|² + |c|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr()
    }

    /// Copy with `b` shifted by `w`.
    pub fn with_shifted_b(&self, w: Complex64) -> Self {
        CoefficientTriple {
            b: self.b + w,
            ..*self
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        Self::new(self.a, self.b, self.c).map(|_| ())
    }
}

/// User sampler for [`CoefficientDistribution::Custom`].
pub type SamplerFn = dyn Fn(&mut dyn RngCore) -> CoefficientTriple + Send + Sync;

/// A law given by a sampling callback. Properties of the law cannot be
/// inspected, so the two-point support condition is whatever the user
/// declares and moment checks are Monte Carlo only.
#[derive(Clone)]
pub struct CustomLaw {
    pub name: String,
    pub declared_multi_point_support: bool,
    sampler: Arc<SamplerFn>,
}

impl CustomLaw {
    pub fn draw(&self, rng: &mut dyn RngCore) -> CoefficientTriple {
        (self.sampler)(rng)
    }
}

impl fmt::Debug for CustomLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLaw")
            .field("name", &self.name)
            .field("declared_multi_point_support", &self.declared_multi_point_support)
            .finish_non_exhaustive()
    }
}

/// Finitely many atoms with probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteAtoms {
    atoms: Vec<(CoefficientTriple, f64)>,
    cumulative: Vec<f64>,
}

impl DiscreteAtoms {
    pub fn new(atoms: Vec<(CoefficientTriple, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        let mut total = 0.0;
        let mut cumulative = Vec::with_capacity(atoms.len());
        for (i, (t, p)) in atoms.iter().enumerate() {
            t.check()?;
            if !(p.is_finite() && *p >= 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "atom {i} has invalid probability {p}"
                )));
            }
            total += p;
            cumulative.push(total);
        }
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(DiscreteAtoms { atoms, cumulative })
    }

    pub fn atoms(&self) -> &[(CoefficientTriple, f64)] {
        &self.atoms
    }

    fn draw(&self, rng: &mut dyn RngCore) -> CoefficientTriple {
        if self.atoms.len() == 1 {
            return self.atoms[0].0;
        }
        let total = *self.cumulative.last().unwrap();
        let u: f64 = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        // zero-probability atoms can never be selected: skip flat steps
        let idx = idx.min(self.atoms.len() - 1);
        self.atoms[idx].0
    }

    /// Exact expectation of `f` over the atoms.
    pub fn expectation(&self, f: impl Fn(&CoefficientTriple) -> f64) -> f64 {
        self.atoms
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(t, p)| p * f(t))
            .sum()
    }
}

/// Sampling law of the i.i.d. coefficient vectors.
#[derive(Debug, Clone)]
pub enum CoefficientDistribution {
    DiscreteAtoms(DiscreteAtoms),
    HatanoNelson(HatanoNelsonParams),
    Custom(CustomLaw),
}

impl CoefficientDistribution {
    pub fn atoms(atoms: Vec<(CoefficientTriple, f64)>) -> Result<Self> {
        DiscreteAtoms::new(atoms).map(CoefficientDistribution::DiscreteAtoms)
    }

    /// Point mass at one triple (constant coefficients).
    pub fn single(triple: CoefficientTriple) -> Self {
        CoefficientDistribution::DiscreteAtoms(DiscreteAtoms {
            atoms: alloc::vec![(triple, 1.0)],
            cumulative: alloc::vec![1.0],
        })
    }

    pub fn hatano_nelson(params: HatanoNelsonParams) -> Result<Self> {
        params.validate()?;
        Ok(CoefficientDistribution::HatanoNelson(params))
    }

    pub fn custom<F>(name: impl Into<String>, declared_multi_point_support: bool, sampler: F) -> Self
    where
        F: Fn(&mut dyn RngCore) -> CoefficientTriple + Send + Sync + 'static,
    {
        CoefficientDistribution::Custom(CustomLaw {
            name: name.into(),
            declared_multi_point_support,
            sampler: Arc::new(sampler),
        })
    }

    /// Short label used in provenance records.
    pub fn label(&self) -> String {
        match self {
            CoefficientDistribution::DiscreteAtoms(d) => format!("atoms[{}]", d.atoms.len()),
            CoefficientDistribution::HatanoNelson(_) => "hatano_nelson".into(),
            CoefficientDistribution::Custom(c) => format!("custom:{}", c.name),
        }
    }

    /// Infinite stream of triples for `(seed, stream)`.
    pub fn stream(&self, seed: u64, stream: u64) -> CoefficientStream<'_> {
        CoefficientStream {
            dist: self,
            rng: substream(seed, stream),
            next_a: None,
        }
    }

    /// `E log|c_1|`: exact for discrete laws, Monte Carlo otherwise.
    pub fn expected_log_abs_c(&self, samples: usize, seed: u64) -> Expectation {
        self.expectation(samples, seed, |t| t.c.norm().ln())
    }

    /// `E log|a_1 / c_1|`: exact for discrete laws, Monte Carlo otherwise.
    pub fn expected_log_abs_ratio(&self, samples: usize, seed: u64) -> Expectation {
        self.expectation(samples, seed, |t| (t.a.norm() / t.c.norm()).ln())
    }

    fn expectation(&self, samples: usize, seed: u64, f: impl Fn(&CoefficientTriple) -> f64) -> Expectation {
        match self {
            CoefficientDistribution::DiscreteAtoms(d) => Expectation {
                value: d.expectation(f),
                std_error: 0.0,
                exact: true,
            },
            _ => {
                let stats: RunningStats = self
                    .stream(mix_seed(seed, EXPECTATION_STREAM_TAG), 0)
                    .take(samples.max(2))
                    .map(|t| f(&t))
                    .collect();
                Expectation {
                    value: stats.mean(),
                    std_error: stats.std_error(),
                    exact: false,
                }
            }
        }
    }
}

const EXPECTATION_STREAM_TAG: u64 = 0x4578_7065_6374;

/// An expectation under the coefficient law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expectation {
    pub value: f64,
    /// Zero when `exact`.
    pub std_error: f64,
    pub exact: bool,
}

/// Iterator over i.i.d. triples drawn from one substream.
#[derive(Debug)]
pub struct CoefficientStream<'a> {
    dist: &'a CoefficientDistribution,
    rng: StreamRng,
    /// Hatano–Nelson: `a_{j+1}` fixed by the previous step's draws.
    next_a: Option<Complex64>,
}

impl Iterator for CoefficientStream<'_> {
    type Item = CoefficientTriple;

    fn next(&mut self) -> Option<CoefficientTriple> {
        let rng: &mut dyn RngCore = &mut self.rng;
        Some(match self.dist {
            CoefficientDistribution::DiscreteAtoms(d) => d.draw(rng),
            CoefficientDistribution::Custom(c) => c.draw(rng),
            CoefficientDistribution::HatanoNelson(p) => {
                let a = match self.next_a {
                    Some(a) => a,
                    None => {
                        let c0 = draw_hn_c(p, rng);
                        let rho0 = p.ratio.sample(rng);
                        (c0 * rho0).conj()
                    }
                };
                let b = p.onsite.sample(rng);
                let c = draw_hn_c(p, rng);
                let rho = p.ratio.sample(rng);
                self.next_a = Some((c * rho).conj());
                CoefficientTriple::unchecked(a, b.into(), c)
            }
        })
    }
}

fn draw_hn_c(p: &HatanoNelsonParams, rng: &mut dyn RngCore) -> Complex64 {
    let modulus = p.c_modulus.sample(rng);
    let phase = p.c_phase.sample(rng);
    Complex64::from_polar(modulus, phase)
}

/// A finite coefficient sequence together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    triples: Vec<CoefficientTriple>,
    seed: u64,
    stream: u64,
}

impl CoefficientSequence {
    /// Wrap explicit triples; `seed` is recorded as provenance only.
    pub fn from_triples(triples: Vec<CoefficientTriple>, seed: u64) -> Result<Self> {
        if triples.is_empty() {
            return Err(Error::InvalidArgument("empty coefficient sequence".into()));
        }
        Ok(CoefficientSequence {
            triples,
            seed,
            stream: 0,
        })
    }

    /// Explicit triples that must lie in the Hatano–Nelson class.
    pub fn hatano_nelson(triples: Vec<CoefficientTriple>) -> Result<Self> {
        if let Some((index, reason)) = hatano_nelson_violation(&triples) {
            return Err(Error::NotHatanoNelson { index, reason });
        }
        Self::from_triples(triples, 0)
    }

    pub fn triples(&self) -> &[CoefficientTriple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Copy with every `b_j` shifted by `w`.
    pub fn with_shifted_b(&self, w: Complex64) -> Self {
        CoefficientSequence {
            triples: self.triples.iter().map(|t| t.with_shifted_b(w)).collect(),
            ..*self
        }
    }

    /// `Σ log|c_j|` over the first `n` triples.
    pub fn sum_log_abs_c(&self, n: usize) -> f64 {
        self.triples[..n].iter().map(|t| t.c.norm().ln()).sum()
    }
}

/// `n` i.i.d. draws from `dist` on stream 0 of `seed`.
pub fn sample_sequence(dist: &CoefficientDistribution, n: usize, seed: u64) -> Result<CoefficientSequence> {
    sample_replica(dist, n, seed, 0)
}

/// `n` i.i.d. draws from `dist` on stream `replica` of `seed`.
pub fn sample_replica(
    dist: &CoefficientDistribution,
    n: usize,
    seed: u64,
    replica: u64,
) -> Result<CoefficientSequence> {
    if n == 0 {
        return Err(Error::InvalidArgument("sequence length must be at least 1".into()));
    }
    let triples: Vec<CoefficientTriple> = dist.stream(seed, replica).take(n).collect();
    if let CoefficientDistribution::Custom(law) = dist {
        for t in &triples {
            t.check().map_err(|e| {
                Error::InvalidDistribution(format!("custom law '{}' produced {e}", law.name))
            })?;
        }
    }
    Ok(CoefficientSequence {
        triples,
        seed,
        stream: replica,
    })
}

/// Sample a Hatano–Nelson sequence and confirm class membership.
pub fn sample_hatano_nelson(params: &HatanoNelsonParams, n: usize, seed: u64) -> Result<CoefficientSequence> {
    let dist = CoefficientDistribution::hatano_nelson(*params)?;
    let seq = sample_sequence(&dist, n, seed)?;
    if let Some((index, reason)) = hatano_nelson_violation(seq.triples()) {
        return Err(Error::NotHatanoNelson { index, reason });
    }
    Ok(seq)
}

/// First index violating `b_j ∈ ℝ` or `conj(a_{j+1}) / c_j > 0`, if any.
pub fn hatano_nelson_violation(triples: &[CoefficientTriple]) -> Option<(usize, &'static str)> {
    for (j, t) in triples.iter().enumerate() {
        if t.b.im.abs() > CLASS_TOLERANCE * t.b.norm().max(1.0) {
            return Some((j, "b is not real"));
        }
        if let Some(next) = triples.get(j + 1) {
            let ratio = next.a.conj() / t.c;
            if !(ratio.re > 0.0 && ratio.im.abs() <= CLASS_TOLERANCE * ratio.norm()) {
                return Some((j, "conj(a_{j+1}) / c_j is not a positive real"));
            }
        }
    }
    None
}

pub fn is_hatano_nelson(triples: &[CoefficientTriple]) -> bool {
    hatano_nelson_violation(triples).is_none()
}

/// Outcome of the two-point support check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportReport {
    pub satisfied: bool,
    /// False when the answer is the user's declaration (custom laws).
    pub verified: bool,
}

/// Whether the support of the law contains at least two distinct triples.
pub fn check_support_condition(dist: &CoefficientDistribution) -> SupportReport {
    match dist {
        CoefficientDistribution::DiscreteAtoms(d) => {
            let live: Vec<&CoefficientTriple> =
                d.atoms.iter().filter(|(_, p)| *p > 0.0).map(|(t, _)| t).collect();
            let satisfied = live.iter().any(|t| **t != *live[0]);
            SupportReport {
                satisfied,
                verified: true,
            }
        }
        CoefficientDistribution::HatanoNelson(p) => SupportReport {
            satisfied: !p.is_degenerate(),
            verified: true,
        },
        CoefficientDistribution::Custom(c) => SupportReport {
            satisfied: c.declared_multi_point_support,
            verified: false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn t(a: f64, b: f64, c: f64) -> CoefficientTriple {
        CoefficientTriple::real(a, b, c).unwrap()
    }

    #[test]
    fn triple_rejects_zero_hopping() {
        assert!(CoefficientTriple::real(0.0, 1.0, 1.0).is_err());
        assert!(CoefficientTriple::real(1.0, 1.0, 0.0).is_err());
        assert!(CoefficientTriple::real(1.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn atoms_must_sum_to_one() {
        assert!(CoefficientDistribution::atoms(vec![(t(1., 0., 1.), 0.5), (t(1., 1., 1.), 0.4)]).is_err());
        assert!(CoefficientDistribution::atoms(vec![(t(1., 0., 1.), -0.5), (t(1., 1., 1.), 1.5)]).is_err());
        assert!(CoefficientDistribution::atoms(vec![(t(1., 0., 1.), 0.5), (t(1., 1., 1.), 0.5)]).is_ok());
    }

    #[test]
    fn single_atom_sequence_is_constant() {
        let d = CoefficientDistribution::single(t(1., 0., 1.));
        let s = sample_sequence(&d, 3, 11).unwrap();
        assert_eq!(s.triples(), &[t(1., 0., 1.); 3]);
        assert!(sample_sequence(&d, 0, 11).is_err());
    }

    #[test]
    fn zero_probability_atom_is_never_drawn() {
        let d = CoefficientDistribution::atoms(vec![(t(1., 0., 1.), 0.0), (t(1., 1., 1.), 1.0)]).unwrap();
        let s = sample_sequence(&d, 500, 2).unwrap();
        assert!(s.triples().iter().all(|x| *x == t(1., 1., 1.)));
    }

    #[test]
    fn support_condition_cases() {
        let one = CoefficientDistribution::single(t(1., 0., 1.));
        assert!(!check_support_condition(&one).satisfied);
        let two = CoefficientDistribution::atoms(vec![(t(1., 0., 1.), 0.3), (t(1., 1., 1.), 0.7)]).unwrap();
        assert!(check_support_condition(&two).satisfied);
        let same = CoefficientDistribution::atoms(vec![(t(1., 0., 1.), 0.3), (t(1., 0., 1.), 0.7)]).unwrap();
        assert!(!check_support_condition(&same).satisfied);
        let custom = CoefficientDistribution::custom("c", true, |_| t(1., 0., 1.));
        let r = check_support_condition(&custom);
        assert!(r.satisfied && !r.verified);
    }

    #[test]
    fn explicit_hatano_nelson_sequences() {
        assert!(CoefficientSequence::hatano_nelson(vec![t(1., 0.3, 1.), t(1., -2.0, 1.)]).is_ok());
        let with_imaginary_b = vec![
            t(1., 0., 1.),
            CoefficientTriple::new(1.0.into(), Complex64::new(0.0, 1.0), 1.0.into()).unwrap(),
        ];
        assert!(matches!(
            CoefficientSequence::hatano_nelson(with_imaginary_b),
            Err(Error::NotHatanoNelson { index: 1, .. })
        ));
        // conj(a_2)/c_1 = -1
        assert!(CoefficientSequence::hatano_nelson(vec![t(1., 0., 1.), t(-1., 0., 1.)]).is_err());
    }

    #[test]
    fn custom_sampler_output_is_validated() {
        let bad = CoefficientDistribution::custom("zero-c", true, |_| {
            CoefficientTriple::unchecked(1.0.into(), 0.0.into(), 0.0.into())
        });
        assert!(matches!(sample_sequence(&bad, 4, 0), Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn exact_log_expectations_for_atoms() {
        let d = CoefficientDistribution::atoms(vec![(t(1., 0., 1.), 0.5), (t(1., 1., 2.), 0.5)]).unwrap();
        let e = d.expected_log_abs_c(0, 0);
        assert!(e.exact);
        assert!((e.value - 0.5 * core::f64::consts::LN_2).abs() < 1e-15);
        let r = d.expected_log_abs_ratio(0, 0);
        assert!((r.value + 0.5 * core::f64::consts::LN_2).abs() < 1e-15);
    }
}
