use super::{check_queries, check_training};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub classes: usize,
    pub k: usize,
}

pub fn fit_knn(features: &[Vec<f64>], labels: &[usize], classes: usize, k: usize) -> Result<KnnModel> {
    check_training(features, labels, classes)?;
    if k == 0 || k > features.len() {
        return Err(Error::Config(format!("k must be in 1..={}, got {k}", features.len())));
    }
    Ok(KnnModel {
        features: features.to_vec(),
        labels: labels.to_vec(),
        classes,
        k,
    })
}

impl KnnModel {
    /// Euclidean majority vote. Distance ties go to the lower stored index and
    /// vote ties to the lower class index.
    pub fn classify(&self, queries: &[Vec<f64>]) -> Result<Vec<usize>> {
        check_queries(queries, self.features[0].len())?;
        Ok(queries.iter().map(|q| self.classify_one(q)).collect())
    }

    fn classify_one(&self, q: &[f64]) -> usize {
        let mut dist: Vec<(f64, usize)> = self
            .features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; self.classes];
        for &(_, i) in &dist[..self.k] {
            votes[self.labels[i]] += 1;
        }
        let mut best = 0;
        for c in 1..self.classes {
            if votes[c] > votes[best] {
                best = c;
            }
        }
        best
    }
}
