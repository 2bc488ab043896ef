//! Goodness-of-fit statistics used to check innovation outputs.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

impl TestOutcome {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value > level
    }
}

/// One-sample Kolmogorov-Smirnov test of `samples` against `cdf`.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<TestOutcome> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("KS test needs at least one sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    Ok(TestOutcome { statistic: d, p_value: kolmogorov_survival(lambda) })
}

/// `P(K > lambda)` for the Kolmogorov distribution.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson chi-square test of homogeneity for a contingency table of counts
/// (one row per group). Empty rows and columns are ignored.
pub fn chi_square_homogeneity(counts: &[Vec<u64>]) -> Result<TestOutcome> {
    let cols = counts.first().map_or(0, Vec::len);
    if counts.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidInput("ragged contingency table".into()));
    }
    let row_tot: Vec<f64> = counts.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_tot: Vec<f64> = (0..cols).map(|j| counts.iter().map(|r| r[j]).sum::<u64>() as f64).collect();
    let total: f64 = row_tot.iter().sum();
    let live_rows = row_tot.iter().filter(|t| **t > 0.0).count();
    let live_cols = col_tot.iter().filter(|t| **t > 0.0).count();
    if live_rows < 2 || live_cols < 2 {
        return Err(Error::InvalidInput("homogeneity test needs two nonempty rows and columns".into()));
    }
    let mut stat = 0.0;
    for (i, row) in counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let expected = row_tot[i] * col_tot[j] / total;
            if expected > 0.0 {
                stat += (c as f64 - expected).powi(2) / expected;
            }
        }
    }
    let dof = ((live_rows - 1) * (live_cols - 1)) as f64;
    let chi = ChiSquared::new(dof).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(TestOutcome { statistic: stat, p_value: chi.sf(stat) })
}

/// Sample lag-`lag` autocorrelation.
pub fn autocorrelation(xs: &[f64], lag: usize) -> f64 {
    let n = xs.len();
    if n <= lag + 1 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let cov: f64 = xs.windows(lag + 1).map(|w| (w[0] - mean) * (w[lag] - mean)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_tail_reference_points() {
        // classical critical values: P(K > 1.358) ~ 0.05, P(K > 1.628) ~ 0.01
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_survival(1.628) - 0.01).abs() < 5e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn ks_accepts_grid_and_rejects_shift() {
        let grid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_test(&grid, |x| x).unwrap().passes(0.01));
        let shifted: Vec<f64> = grid.iter().map(|x| x * 0.8).collect();
        assert!(!ks_test(&shifted, |x| x.clamp(0.0, 1.0)).unwrap().passes(0.01));
    }

    #[test]
    fn chi_square_detects_dependence() {
        let same = vec![vec![100, 200, 300], vec![50, 100, 150]];
        let out = chi_square_homogeneity(&same).unwrap();
        assert!(out.statistic.abs() < 1e-12 && out.p_value > 0.99);
        let skew = vec![vec![300, 200, 100], vec![50, 100, 150]];
        assert!(!chi_square_homogeneity(&skew).unwrap().passes(0.01));
        assert!(chi_square_homogeneity(&[vec![1, 2]]).is_err());
    }

    #[test]
    fn autocorrelation_of_alternating_sequence() {
        let xs: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((autocorrelation(&xs, 1) + 1.0).abs() < 1e-2);
    }
}
