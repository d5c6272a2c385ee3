use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    #[serde(rename = "ce")]
    CrossEntropy,
    Kld,
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&z| z - lse).collect()
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

pub fn one_hot(label: usize, classes: usize) -> Vec<f64> {
    let mut v = vec![0.0; classes];
    v[label] = 1.0;
    v
}

/// Batch-mean loss and its gradient with respect to the logits.
///
/// Both losses share the gradient `(softmax(z) - t) / batch`; they differ by
/// the target entropy, which does not depend on the logits.
pub fn loss_and_grad(logits: &[Vec<f64>], targets: &[Vec<f64>], kind: LossKind) -> Result<(f64, Vec<Vec<f64>>)> {
    if logits.len() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} logit rows but {} target rows",
            logits.len(),
            targets.len()
        )));
    }
    if logits.is_empty() {
        return Err(Error::Contract("empty batch".into()));
    }
    let batch = logits.len() as f64;
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(logits.len());
    for (row, (z, t)) in logits.iter().zip(targets).enumerate() {
        if z.len() != t.len() {
            return Err(Error::Dimension(format!("row {row}: {} logits vs {} targets", z.len(), t.len())));
        }
        let sum: f64 = t.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || t.iter().any(|&v| v < 0.0) {
            return Err(Error::Contract(format!(
                "target row {row} is not a probability distribution (sum {sum})"
            )));
        }
        let logp = log_softmax(z);
        total += match kind {
            LossKind::CrossEntropy => -t.iter().zip(&logp).map(|(&ti, &lp)| ti * lp).sum::<f64>(),
            LossKind::Kld => t
                .iter()
                .zip(&logp)
                .filter(|(&ti, _)| ti > 0.0)
                .map(|(&ti, &lp)| ti * (ti.ln() - lp))
                .sum::<f64>(),
        };
        grads.push(
            logp.iter()
                .zip(t)
                .map(|(&lp, &ti)| (lp.exp() - ti) / batch)
                .collect(),
        );
    }
    Ok((total / batch, grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matched_target_has_zero_kld_and_gradient() {
        let z = vec![0.3, -1.2, 2.0];
        let t = softmax(&z);
        let (loss, g) = loss_and_grad(&[z], &[t], LossKind::Kld).unwrap();
        assert!(loss.abs() < 1e-12);
        assert!(g[0].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn one_hot_kld_equals_ce() {
        let z = vec![vec![0.5, -0.25, 1.75, 0.0]];
        let t = vec![one_hot(2, 4)];
        let (kld, _) = loss_and_grad(&z, &t, LossKind::Kld).unwrap();
        let (ce, _) = loss_and_grad(&z, &t, LossKind::CrossEntropy).unwrap();
        assert_eq!(kld - ce, 0.0);
    }

    #[test]
    fn two_class_hand_values() {
        let (ce, g) = loss_and_grad(&[vec![0.0, 0.0]], &[vec![1.0, 0.0]], LossKind::CrossEntropy).unwrap();
        assert!((ce - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(g[0], vec![-0.5, 0.5]);

        let z = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let t = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        let (_, g) = loss_and_grad(&z, &t, LossKind::CrossEntropy).unwrap();
        assert_eq!(g[0], vec![-0.25, 0.25]);
    }

    #[test]
    fn unnormalized_target_is_rejected() {
        let r = loss_and_grad(&[vec![0.0, 0.0]], &[vec![0.5, 0.6]], LossKind::Kld);
        assert!(matches!(r, Err(Error::Contract(_))));
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0, 0.0, 0.0]), 0);
    }
}
