//! Accuracy confidence intervals and rank-based significance testing.

mod bootstrap;
mod report;
mod stats;

pub use bootstrap::{bootstrap_accuracies, bootstrap_ci, BootstrapCI, DEFAULT_RESAMPLES, DEFAULT_Z};
pub use report::{export_report, load_report, significance_report, SignificanceReport};
pub use stats::{average_ranks, friedman_test, holm_adjust, wilcoxon_signed_rank, RankMatrix, Wilcoxon, EXACT_LIMIT};
