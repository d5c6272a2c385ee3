use std::fmt::Write as _;

use super::experiment::RunRecord;
use crate::error::{Error, Result};

/// Per-iteration accuracy table with one column per method. Cells hold
/// `(mu, halfwidth)` as fractions, averaged over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub methods: Vec<String>,
    pub iterations: Vec<usize>,
    pub cells: Vec<Vec<(f64, f64)>>,
}

pub fn format_cell(mu: f64, halfwidth: f64, percent: bool) -> String {
    if percent {
        format!("{:.2} ± {:.2}", mu * 100.0, halfwidth * 100.0)
    } else {
        format!("{mu:.4} ± {halfwidth:.4}")
    }
}

pub fn parse_cell(cell: &str, percent: bool) -> Result<(f64, f64)> {
    let (a, b) = cell
        .split_once('±')
        .ok_or_else(|| Error::parse("comparison table", format!("cell '{cell}' lacks '±'")))?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::parse("comparison table", format!("cell '{cell}': {e}")))
    };
    let scale = if percent { 100.0 } else { 1.0 };
    Ok((num(a)? / scale, num(b)? / scale))
}

impl ComparisonTable {
    pub fn from_runs(runs: &[RunRecord]) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::Contract("no runs to tabulate".into()));
        }
        let rounds = runs[0].log.records.len();
        if let Some(r) = runs.iter().find(|r| r.log.records.len() != rounds) {
            return Err(Error::Contract(format!(
                "{} seed {} has {} iterations, expected {}",
                r.strategy,
                r.seed,
                r.log.records.len() - 1,
                rounds - 1
            )));
        }
        let mut methods: Vec<String> = Vec::new();
        for r in runs {
            let name = r.strategy.to_string();
            if !methods.contains(&name) {
                methods.push(name);
            }
        }
        let iterations: Vec<usize> = runs[0].log.records.iter().map(|r| r.iteration).collect();
        let cells = (0..rounds)
            .map(|t| {
                methods
                    .iter()
                    .map(|m| {
                        let hits: Vec<_> = runs.iter().filter(|r| &r.strategy.to_string() == m).collect();
                        let n = hits.len() as f64;
                        let mu = hits.iter().map(|r| r.log.records[t].ci.mu).sum::<f64>() / n;
                        let hw = hits.iter().map(|r| r.log.records[t].ci.halfwidth).sum::<f64>() / n;
                        (mu, hw)
                    })
                    .collect()
            })
            .collect();
        Ok(ComparisonTable {
            methods,
            iterations,
            cells,
        })
    }

    /// Row index of the highest `mu` per method; the earliest row wins ties.
    pub fn best_rows(&self) -> Vec<usize> {
        (0..self.methods.len())
            .map(|j| {
                let mut best = 0;
                for (i, row) in self.cells.iter().enumerate() {
                    if row[j].0 > self.cells[best][j].0 {
                        best = i;
                    }
                }
                best
            })
            .collect()
    }

    /// Columns `iteration`, then per method `<method>` and `<method>_best`
    /// (`*` marks the column's best row).
    pub fn to_csv(&self, percent: bool) -> String {
        let mut out = String::from("iteration");
        for m in &self.methods {
            let _ = write!(out, ",{m},{m}_best");
        }
        out.push('\n');
        let best = self.best_rows();
        for (i, row) in self.cells.iter().enumerate() {
            let _ = write!(out, "{}", self.iterations[i]);
            for (j, &(mu, hw)) in row.iter().enumerate() {
                let flag = if best[j] == i { "*" } else { "" };
                let _ = write!(out, ",{},{flag}", format_cell(mu, hw, percent));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str, percent: bool) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::parse("comparison table", "empty input"))?
            .split(',')
            .collect();
        if header.first() != Some(&"iteration") || header.len() % 2 != 1 {
            return Err(Error::parse("comparison table", "malformed header"));
        }
        let methods: Vec<String> = header[1..].iter().step_by(2).map(|s| s.to_string()).collect();
        let mut iterations = Vec::new();
        let mut cells = Vec::new();
        for (n, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(Error::parse("comparison table", format!("line {} has {} fields", n + 2, fields.len())));
            }
            iterations.push(
                fields[0]
                    .parse()
                    .map_err(|e| Error::parse("comparison table", format!("line {}: {e}", n + 2)))?,
            );
            cells.push(
                fields[1..]
                    .iter()
                    .step_by(2)
                    .map(|c| parse_cell(c, percent))
                    .collect::<Result<_>>()?,
            );
        }
        Ok(ComparisonTable {
            methods,
            iterations,
            cells,
        })
    }
}
