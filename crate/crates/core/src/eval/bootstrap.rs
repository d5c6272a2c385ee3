use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{purpose, rng_for};

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const DEFAULT_Z: f64 = 1.96;

/// `mu +/- z * sigma / sqrt(n_tests)` over bootstrap test accuracies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI {
    pub mu: f64,
    pub sigma: f64,
    pub n_tests: usize,
    pub z: f64,
    pub halfwidth: f64,
}

impl BootstrapCI {
    pub fn from_summary(mu: f64, sigma: f64, n_tests: usize, z: f64) -> Self {
        BootstrapCI {
            mu,
            sigma,
            n_tests,
            z,
            halfwidth: z * sigma / (n_tests as f64).sqrt(),
        }
    }

    /// Mean and sample standard deviation (divisor `n - 1`) of `accuracies`.
    pub fn from_accuracies(accuracies: &[f64], z: f64) -> Result<Self> {
        let n = accuracies.len();
        if n < 2 {
            return Err(Error::Contract(format!("need at least 2 resamples, got {n}")));
        }
        let mu = accuracies.iter().sum::<f64>() / n as f64;
        let var = accuracies.iter().map(|a| (a - mu) * (a - mu)).sum::<f64>() / (n - 1) as f64;
        Ok(Self::from_summary(mu, var.sqrt(), n, z))
    }
}

/// Accuracy of each bootstrap resample of the fixed prediction/label pairs.
///
/// Resample `b` draws its indices from its own stream
/// `rng_for(seed, [BOOTSTRAP, b])`, so the result does not depend on how the
/// resamples are scheduled.
pub fn bootstrap_accuracies(predictions: &[usize], labels: &[usize], resamples: usize, seed: u64) -> Result<Vec<f64>> {
    if predictions.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} predictions but {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Contract("test set is empty".into()));
    }
    if resamples < 2 {
        return Err(Error::Contract(format!("need at least 2 resamples, got {resamples}")));
    }
    let correct: Vec<bool> = predictions.iter().zip(labels).map(|(p, l)| p == l).collect();
    let n = correct.len();
    Ok((0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_for(seed, &[purpose::BOOTSTRAP, b as u64]);
            let hits = (0..n).filter(|_| correct[rng.gen_range(0..n)]).count();
            hits as f64 / n as f64
        })
        .collect())
}

pub fn bootstrap_ci(predictions: &[usize], labels: &[usize], resamples: usize, z: f64, seed: u64) -> Result<BootstrapCI> {
    BootstrapCI::from_accuracies(&bootstrap_accuracies(predictions, labels, resamples, seed)?, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_classifier_has_zero_width() {
        let y: Vec<usize> = (0..50).map(|i| i % 4).collect();
        let ci = bootstrap_ci(&y, &y, 1000, 1.96, 1).unwrap();
        assert_eq!(ci.mu, 1.0);
        assert_eq!(ci.sigma, 0.0);
        assert_eq!(ci.halfwidth, 0.0);
    }

    #[test]
    fn closed_form_halfwidth() {
        let ci = BootstrapCI::from_summary(0.5, 0.1, 1000, 1.96);
        assert!((ci.halfwidth - 0.006_198_0).abs() < 1e-7);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(bootstrap_ci(&[0], &[0], 1, 1.96, 0).is_err());
        assert!(bootstrap_ci(&[], &[], 10, 1.96, 0).is_err());
        assert!(bootstrap_ci(&[0, 1], &[0], 10, 1.96, 0).is_err());
    }

    #[test]
    fn seeded_and_plausible() {
        let preds: Vec<usize> = (0..200).map(|i| if i % 4 == 0 { 1 } else { 0 }).collect();
        let labels = vec![0; 200];
        let a = bootstrap_ci(&preds, &labels, 500, 1.96, 7).unwrap();
        assert_eq!(a, bootstrap_ci(&preds, &labels, 500, 1.96, 7).unwrap());
        assert!((a.mu - 0.75).abs() < 0.01);
        // binomial standard error sqrt(p(1-p)/n)
        let se = (0.75f64 * 0.25 / 200.0).sqrt();
        assert!((a.sigma - se).abs() < 0.2 * se);
    }
}
