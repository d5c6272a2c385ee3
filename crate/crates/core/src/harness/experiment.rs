use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::log;
use crate::alloop::{run_strategy, RunLog, Strategy};
use crate::data::{split_pools, Dataset, PoolState, SplitConfig};
use crate::error::{Error, Result};
use crate::eval::{significance_report, RankMatrix, SignificanceReport};
use crate::nn::{build_network, prepare_for_dafl, train, FreezePolicy, NetworkState};
use crate::rng::{derive_seed, purpose};

/// Everything a seed's loops start from.
#[derive(Debug, Clone)]
pub struct SeedSetup {
    pub seed: u64,
    pub pools: PoolState,
    pub network: NetworkState,
    pub validation_accuracy: f64,
}

/// One finished loop, as written to `runs/<strategy>-seed<seed>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub strategy: Strategy,
    pub seed: u64,
    pub log: RunLog,
}

impl RunRecord {
    pub fn file_stem(&self) -> String {
        run_stem(self.strategy, self.seed)
    }
}

pub fn run_stem(strategy: Strategy, seed: u64) -> String {
    format!("{strategy}-seed{seed}")
}

pub fn split_for_seed(dataset: &Dataset, cfg: &ExperimentConfig, seed: u64) -> Result<PoolState> {
    let split = SplitConfig {
        seed: derive_seed(seed, &[purpose::SPLIT]),
        ..cfg.split.clone()
    };
    split_pools(dataset, &split)
}

/// Splits the data and trains the initial network for one seed.
pub fn prepare_seed(dataset: &Dataset, cfg: &ExperimentConfig, seed: u64) -> Result<SeedSetup> {
    let pools = split_for_seed(dataset, cfg, seed)?;
    let input_length = dataset
        .clips
        .first()
        .map(|c| c.samples.len())
        .ok_or_else(|| Error::Config("dataset is empty".into()))?;
    if dataset.clips.iter().any(|c| c.samples.len() != input_length) {
        return Err(Error::Config("clips differ in length; resample or crop them first".into()));
    }
    let spec = cfg
        .network
        .spec(input_length, dataset.num_classes, derive_seed(seed, &[purpose::INIT]));
    let net = build_network(spec)?;
    let labeled = dataset.examples(&pools.labeled)?;
    let validation = dataset.examples(&pools.validation)?;
    let mut pre = cfg.pretrain.clone();
    pre.rng_seed = derive_seed(seed, &[purpose::PRETRAIN, 0]);
    let (mut net, mut val) = train(&net, &labeled, &validation, &pre, &FreezePolicy::NoFreeze)?;
    log::info(&format!("seed {seed}: pretrained, validation accuracy {val:.4}"));
    if cfg.prepare_for_dafl {
        pre.rng_seed = derive_seed(seed, &[purpose::PRETRAIN, 1]);
        net = prepare_for_dafl(&net, &labeled, &validation, &pre)?;
        val = crate::nn::evaluate(&net, &validation)?;
        log::info(&format!("seed {seed}: prepared for fine-tuning, validation accuracy {val:.4}"));
    }
    Ok(SeedSetup {
        seed,
        pools,
        network: net,
        validation_accuracy: val,
    })
}

/// Loop seed for a (strategy, experiment seed) pair.
pub fn loop_seed(strategy: Strategy, seed: u64) -> u64 {
    derive_seed(seed, &[purpose::LOOP, strategy.tag()])
}

/// Runs every strategy for every seed. Results come back ordered by seed,
/// then by the configured strategy order, regardless of scheduling.
pub fn run_experiment(dataset: &Dataset, cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let setups: Vec<SeedSetup> = cfg
        .seeds
        .par_iter()
        .map(|&seed| prepare_seed(dataset, cfg, seed))
        .collect::<Result<_>>()?;
    let jobs: Vec<(&SeedSetup, Strategy)> = setups
        .iter()
        .flat_map(|s| cfg.strategies.iter().map(move |&st| (s, st)))
        .collect();
    jobs.par_iter()
        .map(|&(setup, strategy)| {
            let loop_cfg = cfg.active.loop_config(strategy, loop_seed(strategy, setup.seed));
            let log = run_strategy(dataset, &setup.pools, &setup.network, &loop_cfg)?;
            for r in &log.records {
                log::debug(&format!(
                    "{strategy} seed {} iteration {}: labeled {}, accuracy {:.4}",
                    setup.seed, r.iteration, r.labeled_total, r.test_accuracy
                ));
            }
            log::info(&format!(
                "{strategy} seed {}: final accuracy {:.4}",
                setup.seed,
                log.final_record().test_accuracy
            ));
            Ok(RunRecord {
                strategy,
                seed: setup.seed,
                log,
            })
        })
        .collect()
}

/// Friedman/Wilcoxon/Holm analysis with one block per (seed, iteration >= 1)
/// and per-iteration test accuracies as scores.
pub fn significance_from_runs(runs: &[RunRecord], alpha: f64) -> Result<SignificanceReport> {
    let mut methods: Vec<Strategy> = Vec::new();
    let mut seeds: Vec<u64> = Vec::new();
    for r in runs {
        if !methods.contains(&r.strategy) {
            methods.push(r.strategy);
        }
        if !seeds.contains(&r.seed) {
            seeds.push(r.seed);
        }
    }
    seeds.sort_unstable();
    let mut blocks = Vec::new();
    let mut accuracies = Vec::new();
    for &seed in &seeds {
        let logs: Vec<&RunLog> = methods
            .iter()
            .map(|&m| {
                runs.iter()
                    .find(|r| r.strategy == m && r.seed == seed)
                    .map(|r| &r.log)
                    .ok_or_else(|| Error::Contract(format!("no run for {m} with seed {seed}")))
            })
            .collect::<Result<_>>()?;
        let rounds = logs[0].records.len();
        if logs.iter().any(|l| l.records.len() != rounds) {
            return Err(Error::Contract(format!("runs for seed {seed} differ in iteration count")));
        }
        for t in 1..rounds {
            blocks.push(format!("seed{seed}/iter{t}"));
            accuracies.push(logs.iter().map(|l| l.records[t].test_accuracy).collect());
        }
    }
    let names = methods.iter().map(|m| m.to_string()).collect();
    let matrix = RankMatrix::new(names, blocks, accuracies)?;
    significance_report(&matrix, alpha)
}
