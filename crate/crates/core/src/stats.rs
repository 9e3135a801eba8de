//! Small statistics toolkit: Poisson goodness of fit, correlations and Wilson intervals.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson chi-square goodness-of-fit result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square test of integer samples against Poisson(`mean`).
///
/// Bins are `0, 1, ..., K-1` and a tail bin `>= K`, with `K` chosen so that
/// every bin has expected count at least 5. Degrees of freedom: bins − 1.
pub fn poisson_chi_square(samples: &[u32], mean: f64) -> ChiSquare {
    let n = samples.len() as f64;
    let mut probs = Vec::new();
    let mut pmf = (-mean).exp();
    let mut cum = 0.0;
    let mut k = 0u32;
    loop {
        let tail = 1.0 - cum - pmf;
        if n * pmf < 5.0 || n * tail < 5.0 {
            break;
        }
        probs.push(pmf);
        cum += pmf;
        k += 1;
        pmf *= mean / k as f64;
    }
    // Tail bin holds everything from k upward.
    probs.push((1.0 - cum).max(0.0));
    let nb = probs.len();
    let mut observed = vec![0f64; nb];
    for &s in samples {
        observed[(s as usize).min(nb - 1)] += 1.0;
    }
    if nb < 2 {
        return ChiSquare {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
        };
    }
    let statistic: f64 = observed
        .iter()
        .zip(&probs)
        .map(|(o, p)| {
            let e = n * p;
            (o - e) * (o - e) / e
        })
        .sum();
    let dof = nb - 1;
    let p_value = ChiSquared::new(dof as f64).map_or(f64::NAN, |c| 1.0 - c.cdf(statistic));
    ChiSquare {
        statistic,
        dof,
        p_value,
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample Pearson correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Sample covariance.
pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0)
}

/// 95% two-sided normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Binomial proportion with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub successes: u64,
    pub n: u64,
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Replicas whose infection touched the halo shell.
    pub flagged: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, n: u64) -> Self {
        let (ci_low, ci_high) = wilson(successes, n, Z95);
        let p = if n == 0 { f64::NAN } else { successes as f64 / n as f64 };
        Estimate {
            successes,
            n,
            p,
            ci_low,
            ci_high,
            flagged: 0,
        }
    }

    /// Plug-in binomial standard error.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.p * (1.0 - self.p) / self.n as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{make_stream, Purpose};
    use rand::Rng;
    use rand_distr::{Distribution, Poisson};

    #[test]
    fn wilson_contains_point_estimate() {
        for (k, n) in [(0, 10), (10, 10), (3, 7), (500, 1000)] {
            let (lo, hi) = wilson(k, n, Z95);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
        let (lo, hi) = wilson(50, 100, Z95);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn wilson_coverage() {
        let mut rng = make_stream(99, Purpose::Initial, &[1]);
        for p in [0.1, 0.5, 0.9] {
            let trials = 10_000;
            let n = 200;
            let mut covered = 0;
            for _ in 0..trials {
                let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
                let (lo, hi) = wilson(k, n, Z95);
                covered += (lo <= p && p <= hi) as usize;
            }
            let c = covered as f64 / trials as f64;
            assert!((0.93..=0.97).contains(&c), "coverage {c} at p={p}");
        }
    }

    #[test]
    fn chi_square_accepts_true_poisson_and_rejects_shifted() {
        let mut rng = make_stream(5, Purpose::Initial, &[2]);
        let pois = Poisson::new(1.3).unwrap();
        let xs: Vec<u32> = (0..50_000).map(|_| pois.sample(&mut rng) as u32).collect();
        assert!(poisson_chi_square(&xs, 1.3).p_value > 1e-3);
        assert!(poisson_chi_square(&xs, 1.4).p_value < 1e-6);
    }

    #[test]
    fn correlation_of_identical_is_one() {
        let a = [1.0, 2.0, 3.0, 5.0];
        assert!((correlation(&a, &a) - 1.0).abs() < 1e-12);
        assert_eq!(correlation(&a, &[1.0; 4]), 0.0);
    }
}
