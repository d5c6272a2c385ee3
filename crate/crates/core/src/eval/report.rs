use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::stats::{friedman_test, holm_adjust, wilcoxon_signed_rank, RankMatrix};
use crate::error::{Error, Result};

/// Everything needed to draw a critical-difference diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub methods: Vec<String>,
    pub blocks: usize,
    pub alpha: f64,
    pub friedman_stat: f64,
    pub friedman_p: f64,
    pub average_ranks: Vec<f64>,
    /// Symmetric `m x m` matrices; the diagonal is 1 / false.
    pub raw_p: Vec<Vec<f64>>,
    pub adjusted_p: Vec<Vec<f64>>,
    pub reject: Vec<Vec<bool>>,
    /// Maximal groups of methods whose pairs are all non-significant.
    pub cliques: Vec<Vec<String>>,
}

pub fn significance_report(matrix: &RankMatrix, alpha: f64) -> Result<SignificanceReport> {
    let (friedman_stat, friedman_p) = friedman_test(matrix)?;
    let m = matrix.methods.len();
    let mut pairs = Vec::new();
    let mut raw = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let w = wilcoxon_signed_rank(&matrix.column(i), &matrix.column(j))?;
            pairs.push((i, j));
            raw.push(w.p_value);
        }
    }
    let (adjusted, reject) = holm_adjust(&raw, alpha)?;
    let mut raw_p = vec![vec![1.0; m]; m];
    let mut adjusted_p = vec![vec![1.0; m]; m];
    let mut reject_m = vec![vec![false; m]; m];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        raw_p[i][j] = raw[k];
        raw_p[j][i] = raw[k];
        adjusted_p[i][j] = adjusted[k];
        adjusted_p[j][i] = adjusted[k];
        reject_m[i][j] = reject[k];
        reject_m[j][i] = reject[k];
    }
    let cliques = maximal_cliques(&reject_m)
        .into_iter()
        .map(|c| c.into_iter().map(|k| matrix.methods[k].clone()).collect())
        .collect();
    Ok(SignificanceReport {
        methods: matrix.methods.clone(),
        blocks: matrix.blocks.len(),
        alpha,
        friedman_stat,
        friedman_p,
        average_ranks: matrix.average_ranks(),
        raw_p,
        adjusted_p,
        reject: reject_m,
        cliques,
    })
}

/// Bron-Kerbosch over the "not significantly different" graph.
fn maximal_cliques(reject: &[Vec<bool>]) -> Vec<Vec<usize>> {
    fn expand(r: Vec<usize>, mut p: Vec<usize>, mut x: Vec<usize>, adj: &dyn Fn(usize, usize) -> bool, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() && x.is_empty() {
            out.push(r);
            return;
        }
        while let Some(v) = p.first().copied() {
            let mut r2 = r.clone();
            r2.push(v);
            let p2 = p.iter().copied().filter(|&u| adj(u, v)).collect();
            let x2 = x.iter().copied().filter(|&u| adj(u, v)).collect();
            expand(r2, p2, x2, adj, out);
            p.remove(0);
            x.push(v);
        }
    }
    let m = reject.len();
    let adj = |a: usize, b: usize| a != b && !reject[a][b];
    let mut out = Vec::new();
    expand(Vec::new(), (0..m).collect(), Vec::new(), &adj, &mut out);
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort();
    out
}

pub fn export_report(report: &SignificanceReport, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    crate::harness::write_atomic(path, text.as_bytes())
}

pub fn load_report(path: &Path) -> Result<SignificanceReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))
}
