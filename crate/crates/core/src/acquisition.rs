//! Pool acquisition: BADGE (gradient embeddings + k-means++ seeding) and
//! uniform random selection.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::nn::{argmax, softmax, NetworkState};
use crate::rng::{purpose, rng_for};

/// Per-sample last-layer gradient of the cross-entropy at the predicted label.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEmbedding {
    /// Dataset indices, one per row.
    pub rows: Vec<usize>,
    /// `C * d`.
    pub dims: usize,
    pub values: Vec<f64>,
}

impl GradientEmbedding {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Block `c` of the embedding is `(p_c - [c == argmax p]) * h`, with `h` the
/// penultimate feature vector.
pub fn embedding_row(probs: &[f64], features: &[f64]) -> Vec<f64> {
    let predicted = argmax(probs);
    let mut row = Vec::with_capacity(probs.len() * features.len());
    for (c, &p) in probs.iter().enumerate() {
        let scale = p - if c == predicted { 1.0 } else { 0.0 };
        row.extend(features.iter().map(|&h| scale * h));
    }
    row
}

pub fn badge_embeddings(net: &NetworkState, dataset: &Dataset, pool: &[usize]) -> Result<GradientEmbedding> {
    if pool.is_empty() {
        return Err(Error::Contract("unlabeled pool is empty".into()));
    }
    let rows: Vec<Vec<f64>> = pool
        .par_iter()
        .map(|&i| {
            let trace = net.forward_one(&dataset.clips[i].samples)?;
            Ok(embedding_row(&softmax(trace.logits()), trace.penultimate()))
        })
        .collect::<Result<_>>()?;
    Ok(GradientEmbedding {
        rows: pool.to_vec(),
        dims: net.num_classes() * net.penultimate_dim(),
        values: rows.concat(),
    })
}

/// Embeddings computed from cached penultimate features and the network's
/// output layer; identical to [`badge_embeddings`] when the cache is current.
pub fn badge_from_features(net: &NetworkState, features: &FeatureMatrix, pool: &[usize]) -> Result<GradientEmbedding> {
    if pool.is_empty() {
        return Err(Error::Contract("unlabeled pool is empty".into()));
    }
    let rows = features.select(pool)?;
    let values = rows
        .iter()
        .map(|h| Ok(embedding_row(&softmax(&net.head_logits(h)?), h)))
        .collect::<Result<Vec<_>>>()?
        .concat();
    Ok(GradientEmbedding {
        rows: pool.to_vec(),
        dims: net.num_classes() * features.dims,
        values,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ (D²) seeding over embedding rows; returns the chosen dataset indices
/// in selection order.
pub fn kmeanspp_select(emb: &GradientEmbedding, count: usize, seed: u64) -> Result<Vec<usize>> {
    let n = emb.len();
    if count == 0 || count > n {
        return Err(Error::Contract(format!("cannot select {count} of {n} embeddings")));
    }
    let mut rng = rng_for(seed, &[purpose::SELECT]);
    let mut chosen = vec![false; n];
    let mut order = Vec::with_capacity(count);
    let mut nearest = vec![f64::INFINITY; n];
    let mut next = rng.gen_range(0..n);
    loop {
        chosen[next] = true;
        order.push(next);
        if order.len() == count {
            break;
        }
        let centre = emb.row(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            if !chosen[i] {
                *d = d.min(sq_dist(emb.row(i), centre));
            }
        }
        let total: f64 = (0..n).filter(|&i| !chosen[i]).map(|i| nearest[i]).sum();
        next = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for i in (0..n).filter(|&i| !chosen[i] && nearest[i] > 0.0) {
                acc += nearest[i];
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            let remaining: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            remaining[rng.gen_range(0..remaining.len())]
        };
    }
    Ok(order.into_iter().map(|k| emb.rows[k]).collect())
}

/// Uniform selection of `count` pool entries without replacement.
pub fn random_select(pool: &[usize], count: usize, seed: u64) -> Result<Vec<usize>> {
    if count > pool.len() {
        return Err(Error::Contract(format!(
            "cannot select {count} of {} pool entries",
            pool.len()
        )));
    }
    let mut rng = rng_for(seed, &[purpose::SELECT]);
    Ok(index::sample(&mut rng, pool.len(), count)
        .into_iter()
        .map(|k| pool[k])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points(values: Vec<Vec<f64>>) -> GradientEmbedding {
        GradientEmbedding {
            rows: (0..values.len()).collect(),
            dims: values[0].len(),
            values: values.concat(),
        }
    }

    #[test]
    fn hand_embedding() {
        let row = embedding_row(&[0.7, 0.3], &[1.0, 2.0]);
        let want = [-0.3, -0.6, 0.3, 0.6];
        for (a, b) in row.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn confident_prediction_has_zero_embedding() {
        let row = embedding_row(&[0.0, 1.0, 0.0], &[3.0, -1.0]);
        assert!(row.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn embedding_norm_is_outer_product_norm() {
        let p = [0.2, 0.5, 0.3];
        let h = [1.5, -0.5, 2.0, 0.25];
        let row = embedding_row(&p, &h);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let pn = ((0.2f64).powi(2) + (0.5f64 - 1.0).powi(2) + (0.3f64).powi(2)).sqrt();
        let hn = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - pn * hn).abs() < 1e-12);
    }

    #[test]
    fn kmeanspp_full_selection_is_permutation() {
        let emb = points((0..12).map(|i| vec![i as f64, (i * i) as f64]).collect());
        let mut sel = kmeanspp_select(&emb, 12, 5).unwrap();
        sel.sort_unstable();
        assert_eq!(sel, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn identical_points_use_fallback() {
        let emb = points(vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        let mut sel = kmeanspp_select(&emb, 2, 0).unwrap();
        sel.sort_unstable();
        assert_eq!(sel, vec![0, 1]);
    }

    #[test]
    fn kmeanspp_rejects_bad_count() {
        let emb = points(vec![vec![0.0], vec![1.0]]);
        assert!(kmeanspp_select(&emb, 3, 0).is_err());
        assert!(kmeanspp_select(&emb, 0, 0).is_err());
    }

    #[test]
    fn random_select_properties() {
        let pool: Vec<usize> = (100..110).collect();
        let mut all = random_select(&pool, 10, 3).unwrap();
        all.sort_unstable();
        assert_eq!(all, pool);
        assert_eq!(random_select(&pool, 4, 8).unwrap(), random_select(&pool, 4, 8).unwrap());
        assert!(random_select(&pool, 11, 0).is_err());

        let trials = 10_000;
        let mut counts = [0usize; 10];
        for seed in 0..trials {
            let s = random_select(&pool, 1, seed).unwrap();
            counts[s[0] - 100] += 1;
        }
        let sigma = (trials as f64 * 0.1 * 0.9).sqrt();
        for c in counts {
            assert!((c as f64 - 1000.0).abs() <= 3.0 * sigma, "{counts:?}");
        }
    }
}
