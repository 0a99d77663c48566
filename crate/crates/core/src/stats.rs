//! Empirical percentiles and binomial confidence intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Percentile levels reported for rate distributions.
pub const RATE_LEVELS: [f64; 4] = [1.0, 5.0, 50.0, 90.0];

/// Empirical quantile at `level` percent of already sorted samples, with
/// linear interpolation between order statistics at rank `(n−1)·level/100`.
pub fn percentile_sorted(sorted: &[f64], level: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(0.0..=100.0).contains(&level) {
        return Err(Error::arg("level", format!("{level} is outside [0, 100]")));
    }
    let h = (sorted.len() - 1) as f64 * level / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Quantiles of `samples` at each of `levels` (percent), in the given order.
pub fn percentiles(samples: &[f64], levels: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.iter().any(|s| s.is_nan()) {
        return Err(Error::Numerical("NaN in percentile input".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    levels
        .iter()
        .map(|&l| percentile_sorted(&sorted, l).map(|v| (l, v)))
        .collect()
}

/// Per-UE rate samples together with their reported percentiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStats {
    pub samples: Vec<f64>,
    pub percentiles: Vec<(f64, f64)>,
}

impl RateStats {
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        if samples.iter().any(|s| *s < 0.0) {
            return Err(Error::arg("samples", "rates must be non-negative"));
        }
        let percentiles = percentiles(&samples, &RATE_LEVELS)?;
        Ok(Self {
            samples,
            percentiles,
        })
    }

    /// Percentile at `level`, computed on demand if it is not cached.
    pub fn at(&self, level: f64) -> Result<f64> {
        match self.percentiles.iter().find(|(l, _)| *l == level) {
            Some((_, v)) => Ok(*v),
            None => Ok(percentiles(&self.samples, &[level])?[0].1),
        }
    }

    /// Fraction of samples at or above `threshold`.
    pub fn fraction_at_least(&self, threshold: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().filter(|s| **s >= threshold).count() as f64 / self.samples.len() as f64
    }
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::EmptySamples);
    }
    if successes > trials {
        return Err(Error::arg("successes", "exceeds trial count"));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn constant_samples() {
        let p = percentiles(&[3.5; 17], &RATE_LEVELS).unwrap();
        assert!(p.iter().all(|(_, v)| *v == 3.5));
    }

    #[test]
    fn one_to_hundred_median() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        let p = percentiles(&s, &[50.0, 0.0, 100.0]).unwrap();
        assert_eq!(p, vec![(50.0, 50.5), (0.0, 1.0), (100.0, 100.0)]);
    }

    #[test]
    fn errors() {
        assert_eq!(percentiles(&[], &[50.0]), Err(Error::EmptySamples));
        assert!(percentiles(&[1.0], &[101.0]).is_err());
        assert!(percentiles(&[f64::NAN], &[50.0]).is_err());
        assert!(RateStats::from_samples(vec![-1.0]).is_err());
        assert!(wilson_interval(0, 0, Z95).is_err());
    }

    fn oracle(samples: &[f64], level: f64) -> f64 {
        let mut s = samples.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pos = level / 100.0 * (s.len() as f64 - 1.0);
        let i = pos as usize;
        if i + 1 >= s.len() {
            return s[s.len() - 1];
        }
        s[i] * (1.0 - (pos - i as f64)) + s[i + 1] * (pos - i as f64)
    }

    #[test]
    fn matches_sort_and_index_oracle() {
        let mut rng = RngStream::new(5, 0).rng();
        for _ in 0..2000 {
            let n = rng.random_range(1..60);
            let s: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let level = rng.random_range(0.0..=100.0);
            let got = percentiles(&s, &[level]).unwrap()[0].1;
            assert!((got - oracle(&s, level)).abs() < 1e-12);
        }
    }

    #[test]
    fn wilson_reference_values() {
        let (lo, hi) = wilson_interval(81, 100, Z95).unwrap();
        assert!((lo - 0.7222).abs() < 1e-4 && (hi - 0.8749).abs() < 1e-4, "{lo} {hi}");
        let (lo, hi) = wilson_interval(0, 10, Z95).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.277_533).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn percentiles_monotone(s in prop::collection::vec(0.0f64..1e9, 1..200)) {
            let stats = RateStats::from_samples(s).unwrap();
            for w in stats.percentiles.windows(2) {
                prop_assert!(w[0].1 <= w[1].1);
            }
        }

        #[test]
        fn wilson_contains_estimate(n in 1u64..10_000, frac in 0.0f64..=1.0) {
            let k = ((n as f64) * frac).floor() as u64;
            let (lo, hi) = wilson_interval(k, n, Z95).unwrap();
            let p = k as f64 / n as f64;
            prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
        }
    }
}
