use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest effective sample size for which the Wilcoxon p-value is exact.
pub const EXACT_LIMIT: usize = 25;

/// Ranks of `values` (1 = largest) with tied entries sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    rank_sorted(&order, |i| values[i])
}

/// Ascending average ranks (1 = smallest).
fn ascending_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    rank_sorted(&order, |i| values[i])
}

fn rank_sorted(order: &[usize], key: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut ranks = vec![0.0; order.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && key(order[end]) == key(order[start]) {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Scores of `m` methods over `n` blocks, with per-block ranks (1 = best).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankMatrix {
    pub methods: Vec<String>,
    pub blocks: Vec<String>,
    pub accuracies: Vec<Vec<f64>>,
    pub ranks: Vec<Vec<f64>>,
}

impl RankMatrix {
    pub fn new(methods: Vec<String>, blocks: Vec<String>, accuracies: Vec<Vec<f64>>) -> Result<Self> {
        if accuracies.len() != blocks.len() || accuracies.iter().any(|r| r.len() != methods.len()) {
            return Err(Error::Dimension(format!(
                "accuracy matrix must be {} x {}",
                blocks.len(),
                methods.len()
            )));
        }
        let ranks = accuracies.iter().map(|r| average_ranks(r)).collect();
        Ok(RankMatrix {
            methods,
            blocks,
            accuracies,
            ranks,
        })
    }

    pub fn average_ranks(&self) -> Vec<f64> {
        let n = self.ranks.len() as f64;
        (0..self.methods.len())
            .map(|j| self.ranks.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.accuracies.iter().map(|r| r[j]).collect()
    }
}

/// Friedman chi-square statistic over rank sums and its upper-tail p-value
/// with `m - 1` degrees of freedom.
pub fn friedman_test(matrix: &RankMatrix) -> Result<(f64, f64)> {
    let n = matrix.ranks.len();
    let m = matrix.methods.len();
    if n < 2 || m < 2 {
        return Err(Error::Contract(format!(
            "Friedman test needs at least 2 blocks and 2 methods, got {n} x {m}"
        )));
    }
    let (nf, mf) = (n as f64, m as f64);
    let sum_sq: f64 = (0..m)
        .map(|j| matrix.ranks.iter().map(|r| r[j]).sum::<f64>().powi(2))
        .sum();
    let mut stat = 12.0 / (nf * mf * (mf + 1.0)) * sum_sq - 3.0 * nf * (mf + 1.0);
    if stat.abs() < 1e-9 {
        stat = 0.0;
    }
    let chi = ChiSquared::new(mf - 1.0).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok((stat, chi.sf(stat)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wilcoxon {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub p_value: f64,
    /// Number of non-zero differences.
    pub effective_n: usize,
    pub exact: bool,
}

/// Two-sided Wilcoxon signed-rank test on paired scores.
///
/// Zero differences are dropped and tied magnitudes share their average rank.
/// Up to [`EXACT_LIMIT`] effective pairs the p-value `min(1, 2 P(T <= W))` is
/// computed from the exact null distribution of the positive rank sum;
/// above it a normal approximation with tie and continuity correction is used.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<Wilcoxon> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("paired samples differ in length: {} vs {}", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::Contract("Wilcoxon test needs at least one pair".into()));
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(Wilcoxon {
            statistic: 0.0,
            p_value: 1.0,
            effective_n: 0,
            exact: true,
        });
    }
    let ranks = ascending_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w = w_plus.min(total - w_plus);
    if n <= EXACT_LIMIT {
        let p = (2.0 * exact_lower_tail(&ranks, w)).min(1.0);
        return Ok(Wilcoxon {
            statistic: w,
            p_value: p,
            effective_n: n,
            exact: true,
        });
    }
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = ranks.clone();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = (w - mean + 0.5) / var.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * normal.cdf(z)).min(1.0)
    };
    Ok(Wilcoxon {
        statistic: w,
        p_value: p,
        effective_n: n,
        exact: false,
    })
}

/// `P(T <= w)` where `T` sums a uniformly random subset of `ranks`.
/// Ranks are multiples of 1/2, so the distribution is tabulated over doubled sums.
fn exact_lower_tail(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; max + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let limit = (2.0 * w).round() as usize;
    let hits: f64 = counts[..=limit.min(max)].iter().sum();
    hits / 2f64.powi(ranks.len() as i32)
}

/// Holm step-down adjustment. Returns adjusted p-values (in input order) and
/// rejection flags at `alpha`.
pub fn holm_adjust(pvals: &[f64], alpha: f64) -> Result<(Vec<f64>, Vec<bool>)> {
    if let Some(p) = pvals.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Contract(format!("p-value {p} outside [0,1]")));
    }
    let m = pvals.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvals[a].total_cmp(&pvals[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut reject = vec![false; m];
    let mut running = 0.0f64;
    let mut still_rejecting = true;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max((m - rank) as f64 * pvals[i]).min(1.0);
        adjusted[i] = running;
        still_rejecting &= running <= alpha;
        reject[i] = still_rejecting;
    }
    Ok((adjusted, reject))
}
