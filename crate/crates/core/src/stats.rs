//! Streaming mean/variance with an associative merge, and binomial
//! confidence intervals.

#[allow(unused_imports)]
use num_traits::Float;

/// Welford accumulator. `merge` uses the Chan et al. pairwise update, so
/// partial results from independent workers combine in any grouping
/// (equal up to rounding; fold in replica order for bit-identical output).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n1 = self.count as f64;
        let n2 = other.count as f64;
        let n = n1 + n2;
        let delta = other.mean - self.mean;
        self.mean += delta * n2 / n;
        self.m2 += other.m2 + delta * delta * n1 * n2 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    /// Unbiased sample variance; zero with fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean; zero with fewer than two samples.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = RunningStats::new();
        for x in iter {
            s.push(x);
        }
        s
    }
}

/// Two-sided binomial confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialInterval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

/// Wilson score interval for `successes` out of `trials` at normal quantile
/// `z` (1.96 for 95%).
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> BinomialInterval {
    if trials == 0 {
        return BinomialInterval {
            estimate: f64::NAN,
            low: 0.0,
            high: 1.0,
        };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    BinomialInterval {
        estimate: p,
        low: (center - half).max(0.0),
        high: (center + half).min(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_two_pass_formulas() {
        let xs = [1.0, 4.0, -2.0, 8.5, 3.25];
        let s: RunningStats = xs.iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0;
        assert!((s.mean() - mean).abs() < 1e-14);
        assert!((s.variance() - var).abs() < 1e-12);
        assert!((s.std_error() - (var / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn merge_agrees_with_sequential_push() {
        let xs = [0.5, -1.5, 2.0, 7.0, 3.0, 3.0, -4.0];
        let all: RunningStats = xs.iter().copied().collect();
        let mut left: RunningStats = xs[..3].iter().copied().collect();
        let right: RunningStats = xs[3..].iter().copied().collect();
        left.merge(&right);
        assert_eq!(left.count(), all.count());
        assert!((left.mean() - all.mean()).abs() < 1e-14);
        assert!((left.variance() - all.variance()).abs() < 1e-12);
    }

    #[test]
    fn wilson_interval_brackets_estimate() {
        let ci = wilson_interval(0, 50, 1.96);
        assert_eq!(ci.estimate, 0.0);
        assert_eq!(ci.low, 0.0);
        assert!(ci.high > 0.0 && ci.high < 0.1);
        let ci = wilson_interval(25, 50, 1.96);
        assert!(ci.low < 0.5 && ci.high > 0.5);
    }
}
