use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::lyapunov::{replica_growth_iter, replica_triples, LyapunovMethod, ScaledVector};
use super::matrix::Vec2;
use crate::ensemble::CoefficientDistribution;
use crate::stats::{wilson_interval, BinomialInterval, RunningStats};
use crate::{Error, Result};

/// Normal quantile for the reported 95% intervals.
const Z95: f64 = 1.959_963_984_540_054;

/// `d(x, y) = sqrt(1 - |(x,y)|² / ((x,x)(y,y)))` on `P(C²)`.
///
/// Evaluated as `|x_0 y_1 - x_1 y_0| / (‖x‖ ‖y‖)`, which equals the
/// definition by Lagrange's identity and keeps full relative accuracy for
/// nearly parallel vectors.
pub fn angular_distance(x: Vec2, y: Vec2) -> Result<f64> {
    let nx = (x[0].norm_sqr() + x[1].norm_sqr()).sqrt();
    let ny = (y[0].norm_sqr() + y[1].norm_sqr()).sqrt();
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroVector);
    }
    let (x0, x1) = (x[0] / nx, x[1] / nx);
    let (y0, y1) = (y[0] / ny, y[1] / ny);
    Ok((x0 * y1 - x1 * y0).norm().min(1.0))
}

/// Empirical `P(|log‖S_n x‖ - n γ_1| ≥ ε n)` for `x = (1, 0)^T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeDeviationProbe {
    pub n: usize,
    pub epsilon: f64,
    pub gamma1: f64,
    pub exceedances: u64,
    pub replicas: u64,
    /// 95% Wilson interval for the probability.
    pub interval: BinomialInterval,
}

pub fn large_deviation_probe(
    dist: &CoefficientDistribution,
    z: Complex64,
    n: usize,
    epsilon: f64,
    gamma1: f64,
    replicas: usize,
    seed: u64,
) -> Result<LargeDeviationProbe> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if !gamma1.is_finite() {
        return Err(Error::InvalidArgument("gamma1 must be finite".into()));
    }
    if replicas == 0 {
        return Err(Error::InvalidArgument("replicas must be at least 1".into()));
    }
    let mut exceedances = 0u64;
    for r in 0..replicas as u64 {
        let g = replica_growth_iter(replica_triples(dist, seed, r), z, n, LyapunovMethod::Norm)?;
        if (g.gamma1 - gamma1).abs() >= epsilon {
            exceedances += 1;
        }
    }
    Ok(LargeDeviationProbe {
        n,
        epsilon,
        gamma1,
        exceedances,
        replicas: replicas as u64,
        interval: wilson_interval(exceedances, replicas as u64, Z95),
    })
}

/// Angular behaviour of `y_n = (f_{n+1}, f_n)` relative to `x = (0, 1)` at
/// one checkpoint `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularDecayProbe {
    pub n: usize,
    /// Mean of `(1/n) log d(x, y_n)`.
    pub log_distance_rate: f64,
    pub log_distance_std_error: f64,
    /// Mean of `(1/n) log‖y_n‖`.
    pub log_norm_rate: f64,
    pub log_norm_std_error: f64,
    /// Mean of `(1/n) log|f_{n+1}|`.
    pub log_f_rate: f64,
    /// Largest `|log|f_{n+1}| - log d - log‖y_n‖| / n` over replicas.
    pub identity_defect: f64,
    /// Fraction of replicas with `d(x, y_n) ≤ e^{-n δ}`.
    pub small_distance: BinomialInterval,
    /// Replicas with `f_{n+1} = 0`, excluded from the means.
    pub discarded: usize,
}

/// Track `d(x, y_n)` along one product per replica and report it at each
/// checkpoint. Checkpoints must be increasing and positive.
pub fn angular_decay_probe(
    dist: &CoefficientDistribution,
    z: Complex64,
    checkpoints: &[usize],
    delta: f64,
    replicas: usize,
    seed: u64,
) -> Result<Vec<AngularDecayProbe>> {
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be positive and increasing".into()));
    }
    if !(delta > 0.0) || replicas == 0 {
        return Err(Error::InvalidArgument("delta must be positive and replicas at least 1".into()));
    }
    let m = checkpoints.len();
    let mut dist_stats = alloc::vec![RunningStats::new(); m];
    let mut norm_stats = alloc::vec![RunningStats::new(); m];
    let mut f_stats = alloc::vec![RunningStats::new(); m];
    let mut defect = alloc::vec![0.0f64; m];
    let mut small = alloc::vec![0u64; m];
    let mut discarded = alloc::vec![0usize; m];
    let last = *checkpoints.last().unwrap_or(&0);
    let x = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    for r in 0..replicas as u64 {
        let mut y = ScaledVector::new();
        let mut next = 0;
        for (k, t) in replica_triples(dist, seed, r).take(last).enumerate() {
            let step = k + 1;
            y.step(&t?, z, step)?;
            if step != checkpoints[next] {
                continue;
            }
            let n = step as f64;
            let log_f = y.log_abs_first();
            if log_f == f64::NEG_INFINITY {
                discarded[next] += 1;
            } else {
                let log_norm = y.log_norm();
                let d = angular_distance(x, y.y)?;
                let log_d = d.ln();
                dist_stats[next].push(log_d / n);
                norm_stats[next].push(log_norm / n);
                f_stats[next].push(log_f / n);
                defect[next] = defect[next].max((log_f - log_d - log_norm).abs() / n);
                if log_d <= -delta * n {
                    small[next] += 1;
                }
            }
            next += 1;
        }
    }
    Ok((0..m)
        .map(|i| AngularDecayProbe {
            n: checkpoints[i],
            log_distance_rate: dist_stats[i].mean(),
            log_distance_std_error: dist_stats[i].std_error(),
            log_norm_rate: norm_stats[i].mean(),
            log_norm_std_error: norm_stats[i].std_error(),
            log_f_rate: f_stats[i].mean(),
            identity_defect: defect[i],
            small_distance: wilson_interval(small[i], replicas as u64, Z95),
            discarded: discarded[i],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::CoefficientTriple;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn distance_examples() {
        let e1 = [c(1., 0.), c(0., 0.)];
        let e2 = [c(0., 0.), c(1., 0.)];
        assert_eq!(angular_distance(e1, e1).unwrap(), 0.0);
        assert_eq!(angular_distance(e1, e2).unwrap(), 1.0);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let d = angular_distance(e1, [c(h, 0.), c(h, 0.)]).unwrap();
        assert!((d - h).abs() < 1e-15);
        assert_eq!(angular_distance(e1, [c(0., 0.), c(0., 0.)]), Err(Error::ZeroVector));
    }

    #[test]
    fn single_atom_never_deviates() {
        let dist = CoefficientDistribution::single(CoefficientTriple::real(1., 0., 1.).unwrap());
        let z = c(3.0, 0.0);
        let gamma1 = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        let p = large_deviation_probe(&dist, z, 1000, 0.1, gamma1, 20, 3).unwrap();
        assert_eq!(p.exceedances, 0);
        assert!(p.interval.high < 0.2);
    }

    #[test]
    fn decay_identity_holds() {
        let dist = CoefficientDistribution::atoms(alloc::vec![
            (CoefficientTriple::real(1.0, 0.3, 0.8).unwrap(), 0.5),
            (CoefficientTriple::real(0.6, -0.4, 1.3).unwrap(), 0.5),
        ])
        .unwrap();
        let probes = angular_decay_probe(&dist, c(0.3, 0.2), &[10, 100, 1000], 0.05, 8, 11).unwrap();
        assert_eq!(probes.len(), 3);
        for p in &probes {
            assert!(p.identity_defect < 1e-12);
            assert!(p.log_distance_rate <= 0.0);
        }
    }
}
