//! Small Monte Carlo statistics helpers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Result};

/// Batches used for Monte Carlo standard errors.
pub const DEFAULT_BATCHES: usize = 32;

/// Multiplier applied to standard errors in one-sided comparisons.
pub const SIGMA_MARGIN: f64 = 3.0;

/// Stride of the chain seed splitting rule `seed_i = master ^ (i * stride)`.
pub const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn chain_seed(master: u64, i: u64) -> u64 {
    master ^ i.wrapping_mul(SEED_STRIDE)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub batches: usize,
}

/// Mean with a batch-means standard error.
pub fn batch_means(xs: &[f64], batches: usize) -> MeanEstimate {
    let n = xs.len();
    if n == 0 {
        return MeanEstimate { mean: f64::NAN, std_err: f64::NAN, batches: 0 };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let b = batches.min(n).max(1);
    if b < 2 {
        return MeanEstimate { mean, std_err: f64::INFINITY, batches: b };
    }
    let size = n / b;
    let means: Vec<f64> = (0..b).map(|k| xs[k * size..(k + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let m = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
    MeanEstimate { mean, std_err: (var / b as f64).sqrt(), batches: b }
}

/// Gelman-Rubin potential scale reduction over equally long chains.
pub fn rhat(chains: &[Vec<f64>]) -> Result<f64> {
    let m = chains.len();
    if m < 2 {
        return Err(invalid("R-hat needs at least two chains"));
    }
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    if n < 2 {
        return Err(invalid("R-hat needs at least two draws per chain"));
    }
    let means: Vec<f64> = chains.iter().map(|c| c[..n].iter().sum::<f64>() / n as f64).collect();
    let grand = means.iter().sum::<f64>() / m as f64;
    let b = n as f64 * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>() / (m - 1) as f64;
    let w = chains
        .iter()
        .zip(&means)
        .map(|(c, mu)| c[..n].iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1) as f64)
        .sum::<f64>()
        / m as f64;
    if w == 0.0 {
        // frozen chains: agreement means convergence
        return Ok(if b == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let var = (n - 1) as f64 / n as f64 * w + b / n as f64;
    Ok((var / w).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson test of `counts` against `probs`; cells with zero probability must be empty.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> Result<ChiSquareTest> {
    if counts.len() != probs.len() || counts.len() < 2 {
        return Err(invalid("chi-square needs matching tables with at least two cells"));
    }
    let total: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        let e = p * total as f64;
        if e > 0.0 {
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        } else if c > 0 {
            return Ok(ChiSquareTest { statistic: f64::INFINITY, dof: cells, p_value: 0.0 });
        }
    }
    let dof = cells.saturating_sub(1).max(1);
    let dist = ChiSquared::new(dof as f64).map_err(|e| invalid(e.to_string()))?;
    Ok(ChiSquareTest { statistic: stat, dof, p_value: 1.0 - dist.cdf(stat) })
}

/// `1/2 sum |p - q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_means_of_constant() {
        let e = batch_means(&[2.0; 64], 32);
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.std_err, 0.0);
    }

    #[test]
    fn rhat_detects_disagreement() {
        let a: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let b: Vec<f64> = (0..100).map(|i| (i % 2) as f64 + 5.0).collect();
        assert!(rhat(&[a.clone(), b]).unwrap() > 1.1);
        assert!((rhat(&[a.clone(), a]).unwrap() - 1.0).abs() < 0.02);
    }

    #[test]
    fn chi_square_of_exact_counts_passes() {
        let t = chi_square(&[250, 250, 500], &[0.25, 0.25, 0.5]).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seed_split_is_distinct() {
        assert_eq!(chain_seed(7, 0), 7);
        assert_ne!(chain_seed(7, 1), chain_seed(7, 2));
    }
}
