use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alloop::{LoopConfig, Strategy};
use crate::data::{generate_synthetic, load_dataset, Dataset, SplitConfig, SynthConfig};
use crate::detect::{SegmentConfig, StreamSynthConfig, WindowingConfig};
use crate::error::{Error, Result};
use crate::eval::{DEFAULT_RESAMPLES, DEFAULT_Z};
use crate::nn::{FreezePolicy, NetworkSpec, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Synthetic(SynthConfig),
    Directory(PathBuf),
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic(SynthConfig {
            snr_db: Some(-4.0),
            ..SynthConfig::default()
        })
    }
}

impl DatasetSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSource::Synthetic(cfg) => generate_synthetic(cfg),
            DatasetSource::Directory(dir) => {
                if !dir.is_dir() {
                    return Err(Error::Config(format!("dataset directory {} does not exist", dir.display())));
                }
                load_dataset(dir)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvBlock {
    pub kernel: usize,
    pub filters: usize,
    pub stride: usize,
    pub pool: usize,
}

/// Network architecture; input length and class count come from the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub conv_blocks: Vec<ConvBlock>,
    pub final_kernel: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            conv_blocks: vec![
                ConvBlock {
                    kernel: 16,
                    filters: 8,
                    stride: 4,
                    pool: 4,
                },
                ConvBlock {
                    kernel: 8,
                    filters: 16,
                    stride: 1,
                    pool: 4,
                },
            ],
            final_kernel: 3,
        }
    }
}

impl NetworkConfig {
    pub fn spec(&self, input_length: usize, num_classes: usize, seed: u64) -> NetworkSpec {
        let blocks: Vec<_> = self
            .conv_blocks
            .iter()
            .map(|b| (b.kernel, b.filters, b.stride, b.pool))
            .collect();
        NetworkSpec::small_audio(input_length, num_classes, &blocks, self.final_kernel, seed)
    }
}

/// Loop settings shared by every strategy of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActiveConfig {
    pub iterations: usize,
    pub per_iteration: usize,
    pub budget: Option<usize>,
    pub threshold: Option<f64>,
    pub fine_tune: TrainConfig,
    pub freeze: FreezePolicy,
    pub bootstrap_resamples: usize,
    pub z: f64,
}

impl Default for ActiveConfig {
    fn default() -> Self {
        ActiveConfig {
            iterations: 6,
            per_iteration: 50,
            budget: None,
            threshold: None,
            fine_tune: TrainConfig {
                base_lr: 0.01,
                ..TrainConfig::fine_tune(20, 0)
            },
            freeze: FreezePolicy::NoFreeze,
            bootstrap_resamples: DEFAULT_RESAMPLES,
            z: DEFAULT_Z,
        }
    }
}

impl ActiveConfig {
    pub fn loop_config(&self, strategy: Strategy, seed: u64) -> LoopConfig {
        LoopConfig {
            strategy,
            iterations: self.iterations,
            per_iteration: self.per_iteration,
            budget: self.budget,
            threshold: self.threshold,
            fine_tune: self.fine_tune.clone(),
            freeze: self.freeze.clone(),
            bootstrap_resamples: self.bootstrap_resamples,
            z: self.z,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub split: SplitConfig,
    pub network: NetworkConfig,
    pub pretrain: TrainConfig,
    /// Resize and retrain the last convolution before the loops start.
    pub prepare_for_dafl: bool,
    #[serde(rename = "loop")]
    pub active: ActiveConfig,
    pub strategies: Vec<Strategy>,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
    /// Comparison-table cells in percent ("65.43 ± 0.15") instead of fractions.
    pub percent: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSource::default(),
            split: SplitConfig::default(),
            network: NetworkConfig::default(),
            pretrain: TrainConfig::pretrain(30, 0.05, 0),
            prepare_for_dafl: true,
            active: ActiveConfig::default(),
            strategies: vec![
                Strategy::Dafl,
                Strategy::Dicl,
                Strategy::Dal(crate::classifiers::ClassifierKind::Ridge),
            ],
            seeds: vec![0, 1, 2, 3, 4],
            output: None,
            percent: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds list is empty".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("strategies list is empty".into()));
        }
        let mut seen = self.strategies.clone();
        seen.sort_by_key(|s| s.tag());
        seen.dedup();
        if seen.len() != self.strategies.len() {
            return Err(Error::Config("strategies list has duplicates".into()));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return Err(Error::Config("seeds list has duplicates".into()));
        }
        self.split.validate()?;
        self.pretrain.validate()?;
        self.active.fine_tune.validate()?;
        if self.active.per_iteration == 0 {
            return Err(Error::Config("loop.per_iteration must be positive".into()));
        }
        Ok(())
    }
}

/// Configuration of the `detect` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectConfig {
    /// Recordings to analyse (raw f64 files with JSON sidecars).
    pub streams: Vec<PathBuf>,
    /// Recordings used to train the detector when no checkpoint is given.
    pub training_streams: Vec<PathBuf>,
    /// Synthetic recordings appended to `streams` and `training_streams`.
    pub synthetic_streams: Vec<StreamSynthConfig>,
    pub synthetic_training: Vec<StreamSynthConfig>,
    pub checkpoint: Option<PathBuf>,
    pub network: NetworkConfig,
    pub train: TrainConfig,
    pub negative_ratio: f64,
    pub windowing: WindowingConfig,
    pub segment: SegmentConfig,
    pub seed: u64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            streams: Vec::new(),
            training_streams: Vec::new(),
            synthetic_streams: Vec::new(),
            synthetic_training: Vec::new(),
            checkpoint: None,
            network: NetworkConfig::default(),
            train: TrainConfig::pretrain(20, 0.01, 0),
            negative_ratio: 4.0,
            windowing: WindowingConfig::default(),
            segment: SegmentConfig::default(),
            seed: 0,
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}
