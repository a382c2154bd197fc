use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::matrix::{step_coefficients, ScaledTransferState};
use crate::ensemble::{CoefficientDistribution, CoefficientTriple};
use crate::scaled::{binary_exponent, half_exponent, log2_to_ln, nan_max, pow2};
use crate::stats::RunningStats;
use crate::{Error, Result};

/// Smallest product length accepted by the aggregate estimators.
pub const MIN_LYAPUNOV_STEPS: usize = 1000;

/// Steps between re-orthonormalizations in the pair estimator.
pub const ORTHONORMALIZE_PERIOD: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LyapunovMethod {
    /// Growth of `S_n (1, 0)^T`.
    Norm,
    /// Growth of `‖S_n‖_F`.
    Furstenberg,
    /// Growth of `|f_{n+1}|`.
    Recurrence,
    /// Both exponents from a re-orthonormalized pair of columns.
    QrPair,
}

impl LyapunovMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            LyapunovMethod::Norm => "norm",
            LyapunovMethod::Furstenberg => "furstenberg",
            LyapunovMethod::Recurrence => "recurrence",
            LyapunovMethod::QrPair => "qr_pair",
        }
    }
}

/// Growth rates measured on one replica.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicaGrowth {
    /// `(1/n) log` of the tracked quantity; `-inf` when the recurrence
    /// hit an eigenvalue.
    pub gamma1: f64,
    /// `log_det_rate - gamma1`, or the second column rate for `QrPair`.
    pub gamma2: f64,
    /// Rate over steps `n/2 + 1 ..= n` only, free of the start-up transient.
    pub gamma1_second_half: f64,
    /// `(1/n) Σ log|a_j / c_j|`.
    pub log_det_rate: f64,
}

/// Across-replica Lyapunov estimate. Errors are sample standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Standard error of `gamma1`.
    pub std_error: f64,
    pub std_error_gamma2: f64,
    /// Standard error of `gamma1 - gamma2`, computed per replica.
    pub gap_std_error: f64,
    pub gamma1_second_half: f64,
    pub second_half_std_error: f64,
    /// Mean of `(1/n) log|det S_n|`.
    pub log_det_rate: f64,
    pub log_det_std_error: f64,
    pub n_steps: usize,
    /// Replicas that entered the averages.
    pub replicas: usize,
    /// Replicas dropped because `f_{n+1}` vanished.
    pub discarded: usize,
    pub method: LyapunovMethod,
}

impl LyapunovEstimate {
    /// Aggregate per-replica growth rates in the given order.
    pub fn from_replicas(method: LyapunovMethod, n_steps: usize, growth: &[ReplicaGrowth]) -> Self {
        let mut g1 = RunningStats::new();
        let mut g2 = RunningStats::new();
        let mut gap = RunningStats::new();
        let mut half = RunningStats::new();
        let mut det = RunningStats::new();
        let mut discarded = 0;
        for r in growth {
            if !r.gamma1.is_finite() {
                discarded += 1;
                continue;
            }
            g1.push(r.gamma1);
            g2.push(r.gamma2);
            gap.push(r.gamma1 - r.gamma2);
            half.push(r.gamma1_second_half);
            det.push(r.log_det_rate);
        }
        let mut est = LyapunovEstimate {
            gamma1: g1.mean(),
            gamma2: g2.mean(),
            std_error: g1.std_error(),
            std_error_gamma2: g2.std_error(),
            gap_std_error: gap.std_error(),
            gamma1_second_half: half.mean(),
            second_half_std_error: half.std_error(),
            log_det_rate: det.mean(),
            log_det_std_error: det.std_error(),
            n_steps,
            replicas: g1.count() as usize,
            discarded,
            method,
        };
        if est.gamma1 < est.gamma2 {
            core::mem::swap(&mut est.gamma1, &mut est.gamma2);
            core::mem::swap(&mut est.std_error, &mut est.std_error_gamma2);
        }
        est
    }

    /// `gamma1 - gamma2`.
    pub fn gap(&self) -> f64 {
        self.gamma1 - self.gamma2
    }
}

/// Growth rates of one replica: `n` triples from stream `replica` of `seed`.
pub fn replica_growth(
    dist: &CoefficientDistribution,
    z: Complex64,
    n: usize,
    seed: u64,
    replica: u64,
    method: LyapunovMethod,
) -> Result<ReplicaGrowth> {
    replica_growth_iter(replica_triples(dist, seed, replica), z, n, method)
}

pub(crate) fn replica_triples(
    dist: &CoefficientDistribution,
    seed: u64,
    replica: u64,
) -> impl Iterator<Item = Result<CoefficientTriple>> + '_ {
    let custom = matches!(dist, CoefficientDistribution::Custom(_));
    dist.stream(seed, replica).map(move |t| {
        if custom {
            t.check().map_err(|e| Error::InvalidDistribution(alloc::format!("custom law produced {e}")))?;
        }
        Ok(t)
    })
}

pub(crate) fn replica_growth_iter(
    triples: impl Iterator<Item = Result<CoefficientTriple>>,
    z: Complex64,
    n: usize,
    method: LyapunovMethod,
) -> Result<ReplicaGrowth> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 steps".into()));
    }
    let half = n / 2;
    let inv_n = 1.0 / n as f64;
    let inv_tail = 1.0 / (n - half) as f64;
    let mut det = DetAccumulator::new();
    match method {
        LyapunovMethod::Norm | LyapunovMethod::Recurrence => {
            let mut y = ScaledVector::new();
            let mut at_half = 0.0;
            for (k, t) in triples.take(n).enumerate() {
                let t = t?;
                det.push(&t);
                y.step(&t, z, k + 1)?;
                if k + 1 == half {
                    at_half = tracked(&y, method);
                }
            }
            let end = tracked(&y, method);
            let gamma1 = end * inv_n;
            let log_det_rate = det.log_abs() * inv_n;
            Ok(ReplicaGrowth {
                gamma1,
                gamma2: log_det_rate - gamma1,
                gamma1_second_half: (end - at_half) * inv_tail,
                log_det_rate,
            })
        }
        LyapunovMethod::Furstenberg => {
            let mut s = ScaledTransferState::new();
            let mut at_half = 0.0;
            for (k, t) in triples.take(n).enumerate() {
                let t = t?;
                s.step(&t, z)?;
                if k + 1 == half {
                    at_half = s.log_norm();
                }
            }
            let end = s.log_norm();
            let gamma1 = end * inv_n;
            let log_det_rate = s.log_det().log_abs * inv_n;
            Ok(ReplicaGrowth {
                gamma1,
                gamma2: log_det_rate - gamma1,
                gamma1_second_half: (end - at_half) * inv_tail,
                log_det_rate,
            })
        }
        LyapunovMethod::QrPair => {
            // q is the current first orthonormal column; the second one is
            // its orthogonal complement in C², so only its growth r22 has to
            // be tracked. r22 = |det W| / r11 with |det W| = |det(block)|
            // avoids the cancellation of subtracting nearly parallel columns.
            let mut q = ScaledVector::new();
            let mut block = DetAccumulator::new();
            let (mut sum1, mut sum2) = (0.0, 0.0);
            let mut at_half = 0.0;
            for (k, t) in triples.take(n).enumerate() {
                let t = t?;
                det.push(&t);
                block.push(&t);
                q.step(&t, z, k + 1)?;
                let done = k + 1;
                if done % ORTHONORMALIZE_PERIOD == 0 || done == n || done == half {
                    let log_r11 = q.log_norm();
                    sum1 += log_r11;
                    sum2 += block.log_abs() - log_r11;
                    q.normalize();
                    block = DetAccumulator::new();
                    if done == half {
                        at_half = sum1;
                    }
                }
            }
            let log_det_rate = det.log_abs() * inv_n;
            Ok(ReplicaGrowth {
                gamma1: sum1 * inv_n,
                gamma2: sum2 * inv_n,
                gamma1_second_half: (sum1 - at_half) * inv_tail,
                log_det_rate,
            })
        }
    }
}

fn tracked(y: &ScaledVector, method: LyapunovMethod) -> f64 {
    match method {
        LyapunovMethod::Recurrence => y.log_abs_first(),
        _ => y.log_norm(),
    }
}

/// `(y_0, y_1) · 2^{log2_scale}`, advanced by left multiplication with `g_j`.
pub(super) struct ScaledVector {
    pub(super) y: [Complex64; 2],
    log2_scale: i64,
}

impl ScaledVector {
    pub(super) fn new() -> Self {
        ScaledVector {
            y: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            log2_scale: 0,
        }
    }

    #[inline]
    pub(super) fn step(&mut self, t: &CoefficientTriple, z: Complex64, step: usize) -> Result<()> {
        let (p, q) = step_coefficients(t, z);
        let top = p * self.y[0] + q * self.y[1];
        self.y[1] = self.y[0];
        self.y[0] = top;
        let m2 = nan_max(self.y[0].norm_sqr(), self.y[1].norm_sqr());
        if !(0.25..=4.0).contains(&m2) {
            if !(m2.is_finite() && m2 > 0.0) {
                return Err(Error::NonFinite { step });
            }
            let k = half_exponent(m2);
            let s = pow2(-k);
            self.y[0] *= s;
            self.y[1] *= s;
            self.log2_scale += k as i64;
        }
        Ok(())
    }

    pub(super) fn log_norm(&self) -> f64 {
        log2_to_ln(self.log2_scale) + 0.5 * (self.y[0].norm_sqr() + self.y[1].norm_sqr()).ln()
    }

    pub(super) fn log_abs_first(&self) -> f64 {
        log2_to_ln(self.log2_scale) + self.y[0].norm().ln()
    }

    pub(super) fn normalize(&mut self) {
        let norm = (self.y[0].norm_sqr() + self.y[1].norm_sqr()).sqrt();
        self.y[0] /= norm;
        self.y[1] /= norm;
        self.log2_scale = 0;
    }
}

/// Running `∏ |a_j / c_j|²` as mantissa times a power of two.
struct DetAccumulator {
    mantissa: f64,
    log2_scale: i64,
}

impl DetAccumulator {
    fn new() -> Self {
        DetAccumulator {
            mantissa: 1.0,
            log2_scale: 0,
        }
    }

    #[inline]
    fn push(&mut self, t: &CoefficientTriple) {
        self.mantissa *= t.a().norm_sqr() / t.c().norm_sqr();
        if !(1e-30..=1e30).contains(&self.mantissa) {
            let k = binary_exponent(self.mantissa);
            self.mantissa *= pow2(-k);
            self.log2_scale += k as i64;
        }
    }

    /// `Σ log|a_j / c_j|`.
    fn log_abs(&self) -> f64 {
        0.5 * (self.mantissa.ln() + log2_to_ln(self.log2_scale))
    }
}

/// Estimate by `method` over `replicas` independent replicas; replica `r`
/// uses stream `r` of `seed`.
pub fn lyapunov(
    dist: &CoefficientDistribution,
    z: Complex64,
    n: usize,
    replicas: usize,
    seed: u64,
    method: LyapunovMethod,
) -> Result<LyapunovEstimate> {
    if n < MIN_LYAPUNOV_STEPS {
        return Err(Error::InvalidArgument(alloc::format!(
            "n = {n} is below the minimum of {MIN_LYAPUNOV_STEPS} steps"
        )));
    }
    if replicas == 0 {
        return Err(Error::InvalidArgument("replicas must be at least 1".into()));
    }
    let growth = (0..replicas as u64)
        .map(|r| replica_growth(dist, z, n, seed, r, method))
        .collect::<Result<Vec<_>>>()?;
    Ok(LyapunovEstimate::from_replicas(method, n, &growth))
}

/// Mean of `(1/n) log‖S_n(z)‖_F`.
pub fn lyapunov_top(
    dist: &CoefficientDistribution,
    z: Complex64,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    lyapunov(dist, z, n, replicas, seed, LyapunovMethod::Furstenberg)
}

/// `(gamma1, gamma2)` from the re-orthonormalized column pair.
pub fn lyapunov_pair(
    dist: &CoefficientDistribution,
    z: Complex64,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    lyapunov(dist, z, n, replicas, seed, LyapunovMethod::QrPair)
}

/// Mean of `(1/n) log|f_{n+1}(z)|`.
pub fn lyapunov_via_recurrence(
    dist: &CoefficientDistribution,
    z: Complex64,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    lyapunov(dist, z, n, replicas, seed, LyapunovMethod::Recurrence)
}

/// Mean of `(1/n) log‖S_n(z) (1, 0)^T‖`.
pub fn lyapunov_vector(
    dist: &CoefficientDistribution,
    z: Complex64,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    lyapunov(dist, z, n, replicas, seed, LyapunovMethod::Norm)
}
