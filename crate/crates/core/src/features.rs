//! Penultimate-layer features: the network truncated after the pooled last
//! convolution.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::NetworkState;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    /// Dataset indices, one per row.
    pub rows: Vec<usize>,
    pub dims: usize,
    /// Row-major `rows.len() x dims`.
    pub values: Vec<f64>,
    pub version: u64,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    /// Position of dataset index `id` among the rows.
    pub fn position(&self, id: usize) -> Option<usize> {
        self.rows.iter().position(|&r| r == id)
    }

    /// Rows for the given dataset indices, in that order.
    pub fn select(&self, ids: &[usize]) -> Result<Vec<Vec<f64>>> {
        let lookup: std::collections::HashMap<usize, usize> =
            self.rows.iter().enumerate().map(|(k, &r)| (r, k)).collect();
        ids.iter()
            .map(|id| {
                lookup
                    .get(id)
                    .map(|&k| self.row(k).to_vec())
                    .ok_or_else(|| Error::Contract(format!("no feature row for index {id}")))
            })
            .collect()
    }

    /// Replaces this cache with a newer extraction; older versions are rejected.
    pub fn replace_with(&mut self, newer: FeatureMatrix) -> Result<()> {
        if newer.version <= self.version {
            return Err(Error::Contract(format!(
                "feature version regression: {} -> {}",
                self.version, newer.version
            )));
        }
        *self = newer;
        Ok(())
    }

    /// CSV dump with header `id,f0..f{d-1},version`.
    pub fn to_csv(&self, dataset: &Dataset) -> String {
        let mut out = String::from("id");
        for k in 0..self.dims {
            let _ = write!(out, ",f{k}");
        }
        out.push_str(",version\n");
        for (k, &r) in self.rows.iter().enumerate() {
            out.push_str(&dataset.clips[r].id);
            for v in self.row(k) {
                let _ = write!(out, ",{v:?}");
            }
            let _ = writeln!(out, ",{}", self.version);
        }
        out
    }
}

pub fn extract_features(net: &NetworkState, dataset: &Dataset, indices: &[usize]) -> Result<FeatureMatrix> {
    extract_versioned(net, dataset, indices, 0)
}

fn extract_versioned(net: &NetworkState, dataset: &Dataset, indices: &[usize], version: u64) -> Result<FeatureMatrix> {
    let rows: Vec<Vec<f64>> = indices
        .par_iter()
        .map(|&i| net.penultimate(&dataset.clips[i].samples))
        .collect::<Result<_>>()?;
    Ok(FeatureMatrix {
        rows: indices.to_vec(),
        dims: net.penultimate_dim(),
        values: rows.concat(),
        version,
    })
}

/// Full re-extraction with the fine-tuned network; the version is bumped by one.
pub fn refresh_features(cache: &FeatureMatrix, net: &NetworkState, dataset: &Dataset) -> Result<FeatureMatrix> {
    extract_versioned(net, dataset, &cache.rows, cache.version + 1)
}
