//! Monte Carlo bookkeeping: estimates, mergeable accumulators and the few
//! interval and goodness-of-fit helpers the checks need.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF};

/// Truncation diagnostics carried by every estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Upper bound on the per-vertex loop mass dropped by the length cutoff.
    pub tail_bound: f64,
    /// Fraction of samples whose cluster reached the window boundary.
    pub boundary_touch_rate: f64,
}

/// A Monte Carlo result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub diagnostics: Diagnostics,
    pub wall_time_s: f64,
}

impl Estimate {
    pub fn from_accumulator(acc: &MeanAccumulator, seed: u64, diagnostics: Diagnostics) -> Estimate {
        Estimate {
            value: acc.mean(),
            std_error: acc.std_error(),
            samples: acc.count(),
            seed,
            diagnostics,
            wall_time_s: 0.0,
        }
    }

    pub fn with_wall_time(mut self, secs: f64) -> Estimate {
        self.wall_time_s = secs;
        self
    }

    /// `|self - other|` in units of the combined standard error.
    pub fn z_score(&self, other: &Estimate) -> f64 {
        z_score(self.value, self.std_error, other.value, other.std_error)
    }
}

pub fn z_score(a: f64, se_a: f64, b: f64, se_b: f64) -> f64 {
    let se = (se_a * se_a + se_b * se_b).sqrt();
    let diff = (a - b).abs();
    if se == 0.0 {
        if diff == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        diff / se
    }
}

/// Welford running mean and variance; merging is Chan's pairwise update so
/// batches can be combined in a fixed order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 { 0.0 } else { self.m2 / (self.n - 1) as f64 }
    }

    pub fn std_error(&self) -> f64 {
        if self.n < 2 { 0.0 } else { (self.variance() / self.n as f64).sqrt() }
    }
}

impl FromIterator<f64> for MeanAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = MeanAccumulator::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Binomial proportion with its plug-in standard error.
pub fn proportion(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 0.0);
    }
    let p = successes as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

/// Two-sided Clopper-Pearson interval at confidence `1 - alpha`.
pub fn clopper_pearson(successes: u64, trials: u64, alpha: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let k = successes as f64;
    let n = trials as f64;
    let lo = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).expect("beta parameters").inverse_cdf(alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k).expect("beta parameters").inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Pearson chi-square goodness of fit. Cells with expected count below 5
/// are pooled into one. Returns `(statistic, degrees of freedom, p-value)`.
pub fn chi_square_test(observed: &[u64], expected: &[f64]) -> (f64, usize, f64) {
    assert_eq!(observed.len(), expected.len());
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        if e < 5.0 {
            pool_o += o as f64;
            pool_e += e;
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    if pool_e > 0.0 {
        stat += (pool_o - pool_e).powi(2) / pool_e;
        cells += 1;
    }
    let dof = cells.saturating_sub(1).max(1);
    let p = 1.0 - ChiSquared::new(dof as f64).expect("dof > 0").cdf(stat);
    (stat, dof, p)
}

/// Total-variation distance between two probability vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let all: MeanAccumulator = xs.iter().copied().collect();
        let mut a: MeanAccumulator = xs[..333].iter().copied().collect();
        let b: MeanAccumulator = xs[333..].iter().copied().collect();
        a.merge(&b);
        assert_eq!(a.count(), all.count());
        assert!((a.mean() - all.mean()).abs() < 1e-12);
        assert!((a.variance() - all.variance()).abs() < 1e-9);
    }

    #[test]
    fn clopper_pearson_zero_successes() {
        let (lo, hi) = clopper_pearson(0, 100, 0.05);
        assert_eq!(lo, 0.0);
        // exact: 1 - 0.025^(1/100)
        assert!((hi - (1.0 - 0.025f64.powf(0.01))).abs() < 1e-9);
    }

    #[test]
    fn chi_square_accepts_exact_counts() {
        let (_, _, p) = chi_square_test(&[100, 200, 300], &[100.0, 200.0, 300.0]);
        assert!(p > 0.999);
        let (_, _, p) = chi_square_test(&[300, 200, 100], &[100.0, 200.0, 300.0]);
        assert!(p < 1e-6);
    }
}
