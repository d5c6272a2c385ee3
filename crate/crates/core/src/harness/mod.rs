//! Experiment orchestration and the command-line front end.

mod cli;
mod config;
mod experiment;
mod table;

pub use cli::run_command;
pub use config::{
    read_json, ActiveConfig, ConvBlock, DatasetSource, DetectConfig, ExperimentConfig, NetworkConfig,
};
pub use experiment::{
    loop_seed, prepare_seed, run_experiment, run_stem, significance_from_runs, split_for_seed, RunRecord, SeedSetup,
};
pub use table::{format_cell, parse_cell, ComparisonTable};

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Stderr logging controlled by `DAFL_LOG` (`off`, `info` (default), `debug`).
pub(crate) mod log {
    fn level() -> u8 {
        match std::env::var("DAFL_LOG").as_deref() {
            Ok("off") | Ok("0") | Ok("quiet") => 0,
            Ok("debug") | Ok("2") => 2,
            _ => 1,
        }
    }

    pub fn info(msg: &str) {
        if level() >= 1 {
            eprintln!("[dafl] {msg}");
        }
    }

    pub fn debug(msg: &str) {
        if level() >= 2 {
            eprintln!("[dafl] {msg}");
        }
    }
}
