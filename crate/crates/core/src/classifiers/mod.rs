//! Fixed-feature classifiers used by the conventional deep active learning
//! baselines. All three predict by argmax with lowest-index tie-breaking.

mod knn;
mod logistic;
mod ridge;

pub use knn::{fit_knn, KnnModel};
pub use logistic::{fit_logreg, logistic_objective, LogisticConfig, LogisticModel};
pub use ridge::{fit_ridge, normal_equation_residual, RidgeConfig, RidgeModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::argmax;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Ridge,
    #[serde(rename = "logreg")]
    Logistic,
    Knn,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Ridge => "ridge",
            ClassifierKind::Logistic => "logreg",
            ClassifierKind::Knn => "knn",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Ridge(RidgeModel),
    Logistic(LogisticModel),
    Knn(KnnModel),
}

impl Classifier {
    /// Fits `kind` with default hyperparameters (k = 5, alpha = 1, l2 = 1e-4).
    /// k is clamped to the number of training rows.
    pub fn fit(kind: ClassifierKind, features: &[Vec<f64>], labels: &[usize], classes: usize) -> Result<Self> {
        Ok(match kind {
            ClassifierKind::Ridge => Classifier::Ridge(fit_ridge(features, labels, classes, &RidgeConfig::default())?),
            ClassifierKind::Logistic => {
                Classifier::Logistic(fit_logreg(features, labels, classes, &LogisticConfig::default())?)
            }
            ClassifierKind::Knn => Classifier::Knn(fit_knn(features, labels, classes, 5.min(features.len()))?),
        })
    }

    pub fn classify(&self, queries: &[Vec<f64>]) -> Result<Vec<usize>> {
        match self {
            Classifier::Ridge(m) => m.classify(queries),
            Classifier::Logistic(m) => m.classify(queries),
            Classifier::Knn(m) => m.classify(queries),
        }
    }
}

/// Row-major `d x C` linear scorer shared by ridge and logistic models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub dims: usize,
    pub classes: usize,
    /// `weights[j * classes + c]`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(dims: usize, classes: usize) -> Self {
        Linear {
            dims,
            classes,
            weights: vec![0.0; dims * classes],
            bias: vec![0.0; classes],
        }
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut s = self.bias.clone();
        for (j, &xj) in x.iter().enumerate() {
            let w = &self.weights[j * self.classes..(j + 1) * self.classes];
            for (sc, &wc) in s.iter_mut().zip(w) {
                *sc += xj * wc;
            }
        }
        s
    }

    pub fn classify(&self, queries: &[Vec<f64>]) -> Result<Vec<usize>> {
        check_queries(queries, self.dims)?;
        Ok(queries.iter().map(|q| argmax(&self.scores(q))).collect())
    }
}

pub(crate) fn check_training(features: &[Vec<f64>], labels: &[usize], classes: usize) -> Result<usize> {
    if features.is_empty() {
        return Err(Error::Contract("no training rows".into()));
    }
    if features.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let d = features[0].len();
    if features.iter().any(|r| r.len() != d) {
        return Err(Error::Dimension("ragged feature rows".into()));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::Contract(format!("label {l} out of range for {classes} classes")));
    }
    Ok(d)
}

pub(crate) fn check_queries(queries: &[Vec<f64>], dims: usize) -> Result<()> {
    if queries.is_empty() {
        return Err(Error::Contract("empty query set".into()));
    }
    if queries.iter().any(|q| q.len() != dims) {
        return Err(Error::Dimension(format!("query rows must have {dims} features")));
    }
    Ok(())
}
