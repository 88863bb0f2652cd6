//! Binomial confidence intervals and goodness-of-fit helpers used by the
//! Monte Carlo estimators and their tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Whether `value` lies within `k` Wilson standard errors of the observed
/// frequency, i.e. inside the Wilson interval computed with `z = k`.
pub fn within_wilson(successes: u64, trials: u64, value: f64, k: f64) -> bool {
    let (lo, hi) = wilson_interval(successes, trials, k);
    value >= lo && value <= hi
}

/// Standard error of a binomial frequency with success probability `p`.
pub fn binomial_se(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Error frequency with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub errors: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ErrorEstimate {
    pub fn from_counts(errors: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(errors, trials, 1.959_963_984_540_054);
        ErrorEstimate {
            errors,
            trials,
            rate: if trials == 0 {
                f64::NAN
            } else {
                errors as f64 / trials as f64
            },
            ci_low,
            ci_high,
        }
    }

    pub fn within(&self, value: f64, k: f64) -> bool {
        within_wilson(self.errors, self.trials, value, k)
    }
}

/// Pearson chi-square statistic and its upper-tail p-value for the
/// hypothesis that `counts` are drawn uniformly over their bins.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let k = counts.len();
    assert!(k >= 2, "need at least two bins");
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / k as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dist = ChiSquared::new((k - 1) as f64).expect("positive degrees of freedom");
    (stat, dist.sf(stat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wilson_known_value() {
        // 10/100 at z=1.96: (0.0552, 0.1744)
        let (lo, hi) = wilson_interval(10, 100, 1.96);
        assert_abs_diff_eq!(lo, 0.05523, epsilon = 1e-4);
        assert_abs_diff_eq!(hi, 0.17437, epsilon = 1e-4);
    }

    #[test]
    fn wilson_zero_successes_has_positive_upper() {
        let (lo, hi) = wilson_interval(0, 1000, 4.0);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.02);
    }

    #[test]
    fn chi_square_flat_is_perfect() {
        let (stat, p) = chi_square_uniform(&[100, 100, 100, 100]);
        assert_eq!(stat, 0.0);
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
        let (_, p) = chi_square_uniform(&[400, 0, 0, 0]);
        assert!(p < 1e-10);
    }
}
