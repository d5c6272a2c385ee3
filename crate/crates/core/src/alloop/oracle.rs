use std::collections::{BTreeMap, BTreeSet};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Simulated annotator: holds the withheld labels of the unlabeled pool and
/// releases each one exactly once.
#[derive(Debug, Clone)]
pub struct AnnotationOracle {
    hidden: BTreeMap<usize, usize>,
    consumed: BTreeSet<usize>,
    queries: usize,
}

impl AnnotationOracle {
    pub fn new(dataset: &Dataset, pool: &[usize]) -> Result<Self> {
        let hidden = pool
            .iter()
            .map(|&i| Ok((i, dataset.label(i)?)))
            .collect::<Result<_>>()?;
        Ok(AnnotationOracle {
            hidden,
            consumed: BTreeSet::new(),
            queries: 0,
        })
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    /// Returns the true labels of `ids`; unknown or repeated ids are errors and
    /// leave the oracle untouched.
    pub fn annotate(&mut self, ids: &[usize]) -> Result<Vec<usize>> {
        let mut batch = BTreeSet::new();
        for &id in ids {
            if !self.hidden.contains_key(&id) {
                return Err(Error::Contract(format!("index {id} is not in the annotation pool")));
            }
            if self.consumed.contains(&id) || !batch.insert(id) {
                return Err(Error::Contract(format!("index {id} was already annotated")));
            }
        }
        self.consumed.extend(ids.iter().copied());
        self.queries += ids.len();
        Ok(ids.iter().map(|id| self.hidden[id]).collect())
    }
}
