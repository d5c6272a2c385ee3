//! The active-learning loop for the three strategies:
//!
//! * DAFL: BADGE selection on features re-extracted from the fine-tuned
//!   network, followed by a fine-tuning round each iteration.
//! * DIcL: random selection followed by the same fine-tuning round.
//! * DAL: BADGE selection on the frozen network's features and a classical
//!   classifier refit from scratch on the labeled features.

mod oracle;

pub use oracle::AnnotationOracle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::acquisition::{badge_from_features, kmeanspp_select, random_select};
use crate::classifiers::{Classifier, ClassifierKind};
use crate::data::{Dataset, PoolState};
use crate::error::{Error, Result};
use crate::eval::{bootstrap_ci, BootstrapCI, DEFAULT_RESAMPLES, DEFAULT_Z};
use crate::features::{extract_features, refresh_features, FeatureMatrix};
use crate::nn::{evaluate, predict, train, Examples, FreezePolicy, NetworkState, TrainConfig};
use crate::rng::{derive_seed, purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Dafl,
    Dicl,
    Dal(ClassifierKind),
}

impl Strategy {
    pub fn fine_tunes(self) -> bool {
        matches!(self, Strategy::Dafl | Strategy::Dicl)
    }

    /// Stable numeric tag used for seed derivation.
    pub fn tag(self) -> u64 {
        match self {
            Strategy::Dafl => 1,
            Strategy::Dicl => 2,
            Strategy::Dal(ClassifierKind::Ridge) => 3,
            Strategy::Dal(ClassifierKind::Logistic) => 4,
            Strategy::Dal(ClassifierKind::Knn) => 5,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Dafl => f.write_str("dafl"),
            Strategy::Dicl => f.write_str("dicl"),
            Strategy::Dal(k) => write!(f, "dal-{}", k.name()),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dafl" => Strategy::Dafl,
            "dicl" => Strategy::Dicl,
            "dal-ridge" => Strategy::Dal(ClassifierKind::Ridge),
            "dal-logreg" => Strategy::Dal(ClassifierKind::Logistic),
            "dal-knn" => Strategy::Dal(ClassifierKind::Knn),
            other => return Err(Error::Config(format!("unknown strategy '{other}'"))),
        })
    }
}

impl Serialize for Strategy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    pub strategy: Strategy,
    pub iterations: usize,
    pub per_iteration: usize,
    /// Labeling budget B; defaults to `|S_l| + iterations * per_iteration`.
    pub budget: Option<usize>,
    /// Stop once test accuracy reaches this value.
    pub threshold: Option<f64>,
    /// Fine-tuning schedule; `epochs` is E.
    pub fine_tune: TrainConfig,
    pub freeze: FreezePolicy,
    pub bootstrap_resamples: usize,
    pub z: f64,
    pub seed: u64,
}

impl LoopConfig {
    pub fn new(strategy: Strategy, iterations: usize, per_iteration: usize, fine_tune: TrainConfig, seed: u64) -> Self {
        LoopConfig {
            strategy,
            iterations,
            per_iteration,
            budget: None,
            threshold: None,
            fine_tune,
            freeze: FreezePolicy::NoFreeze,
            bootstrap_resamples: DEFAULT_RESAMPLES,
            z: DEFAULT_Z,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Dataset indices chosen by the acquisition function (S).
    pub selected: Vec<usize>,
    /// |S_a|
    pub annotated: usize,
    /// |S_t|; zero for strategies that do not fine-tune.
    pub fine_tune_size: usize,
    pub validation_accuracy: f64,
    /// R_es
    pub test_accuracy: f64,
    pub ci: BootstrapCI,
    pub labeled_total: usize,
    /// Version of the feature matrix the model used in this iteration.
    pub feature_version: u64,
    pub network_fingerprint: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub config: LoopConfig,
    pub budget: usize,
    pub records: Vec<IterationRecord>,
    /// Output L: (dataset index, label) for every labeled or remaining pool
    /// item, true labels where known and model predictions otherwise.
    pub final_labels: Vec<(usize, usize)>,
    pub annotation_queries: usize,
}

impl RunLog {
    pub fn final_record(&self) -> &IterationRecord {
        self.records.last().expect("a run log always holds the baseline record")
    }

    /// Per-iteration table `iteration,labeled,mu,ci_halfwidth`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,labeled,mu,ci_halfwidth\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{:?},{:?}\n", r.iteration, r.labeled_total, r.ci.mu, r.ci.halfwidth));
        }
        out
    }
}

/// The model a strategy predicts with in a given iteration.
enum Model<'a> {
    Network(&'a NetworkState),
    Classifier(&'a Classifier, &'a FeatureMatrix),
}

impl Model<'_> {
    fn predict(&self, dataset: &Dataset, ids: &[usize]) -> Result<Vec<usize>> {
        match self {
            Model::Network(net) => predict(net, &dataset.inputs(ids)),
            Model::Classifier(clf, feats) => {
                if ids.is_empty() {
                    return Ok(Vec::new());
                }
                clf.classify(&feats.select(ids)?)
            }
        }
    }
}

fn labels_of(dataset: &Dataset, ids: &[usize]) -> Result<Vec<usize>> {
    ids.iter().map(|&i| dataset.label(i)).collect()
}

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

/// Trains on the new batch plus an equally sized random replay of previously
/// labeled items. Returns the fine-tuned network, its validation accuracy and |S_t|.
#[allow(clippy::too_many_arguments)]
pub fn fine_tune_round(
    net: &NetworkState,
    dataset: &Dataset,
    new_batch: &[(usize, usize)],
    prior: &[(usize, usize)],
    validation: &Examples<'_>,
    config: &TrainConfig,
    policy: &FreezePolicy,
    seed: u64,
) -> Result<(NetworkState, f64, usize)> {
    if new_batch.is_empty() {
        return Err(Error::Contract("fine-tuning needs at least one new sample".into()));
    }
    if validation.is_empty() {
        return Err(Error::Contract("validation set is empty".into()));
    }
    let replay_count = new_batch.len().min(prior.len());
    let positions: Vec<usize> = (0..prior.len()).collect();
    let replay = random_select(&positions, replay_count, derive_seed(seed, &[purpose::REPLAY]))?;
    let mut ids: Vec<usize> = new_batch.iter().map(|p| p.0).collect();
    let mut labels: Vec<usize> = new_batch.iter().map(|p| p.1).collect();
    for k in replay {
        ids.push(prior[k].0);
        labels.push(prior[k].1);
    }
    let set = Examples::new(dataset.inputs(&ids), labels);
    let (tuned, val) = train(net, &set, validation, config, policy)?;
    Ok((tuned, val, set.len()))
}

/// Validation/test bookkeeping shared by every iteration of a run.
struct Scorer<'a> {
    dataset: &'a Dataset,
    validation: &'a [usize],
    val_labels: Vec<usize>,
    test: &'a [usize],
    test_labels: Vec<usize>,
    resamples: usize,
    z: f64,
    seed: u64,
}

impl Scorer<'_> {
    fn validation_accuracy(&self, model: &Model<'_>) -> Result<f64> {
        Ok(accuracy(&model.predict(self.dataset, self.validation)?, &self.val_labels))
    }

    fn test(&self, model: &Model<'_>, iteration: usize) -> Result<(f64, BootstrapCI)> {
        let preds = model.predict(self.dataset, self.test)?;
        let seed = derive_seed(self.seed, &[purpose::BOOTSTRAP, iteration as u64]);
        let ci = bootstrap_ci(&preds, &self.test_labels, self.resamples, self.z, seed)?;
        Ok((accuracy(&preds, &self.test_labels), ci))
    }
}

/// Runs one strategy from the given partition and pretrained network.
///
/// Iteration 0 records the model before any acquisition. The loop stops when
/// the configured iterations are done, when another batch would exceed the
/// budget, or when test accuracy reaches the threshold.
pub fn run_strategy(dataset: &Dataset, pools: &PoolState, net: &NetworkState, cfg: &LoopConfig) -> Result<RunLog> {
    pools.check_partition(dataset.len())?;
    if cfg.per_iteration == 0 {
        return Err(Error::Config("per_iteration must be positive".into()));
    }
    if cfg.iterations * cfg.per_iteration > pools.pool.len() {
        return Err(Error::Config(format!(
            "{} iterations x {} samples exceed the pool of {}",
            cfg.iterations,
            cfg.per_iteration,
            pools.pool.len()
        )));
    }
    if pools.validation.is_empty() || pools.test.is_empty() {
        return Err(Error::Contract("validation and test sets must be nonempty".into()));
    }
    let initial = pools;
    let mut pools = pools.clone();
    let mut net = net.clone();
    let mut oracle = AnnotationOracle::new(dataset, &pools.pool)?;
    let budget = cfg.budget.unwrap_or(pools.labeled.len() + cfg.iterations * cfg.per_iteration);

    // labels the learner is allowed to see, in the order they became known
    let mut known: Vec<(usize, usize)> = pools
        .labeled
        .iter()
        .map(|&i| Ok((i, dataset.label(i)?)))
        .collect::<Result<_>>()?;

    let scorer = Scorer {
        dataset,
        validation: &initial.validation,
        val_labels: labels_of(dataset, &initial.validation)?,
        test: &initial.test,
        test_labels: labels_of(dataset, &initial.test)?,
        resamples: cfg.bootstrap_resamples,
        z: cfg.z,
        seed: cfg.seed,
    };
    let validation = Examples::new(dataset.inputs(&initial.validation), scorer.val_labels.clone());

    let mut all_ids: Vec<usize> = initial
        .labeled
        .iter()
        .chain(&initial.validation)
        .chain(&initial.test)
        .chain(&initial.pool)
        .copied()
        .collect();
    all_ids.sort_unstable();
    let mut features = extract_features(&net, dataset, &all_ids)?;

    let fit_classifier = |features: &FeatureMatrix, known: &[(usize, usize)]| -> Result<Option<Classifier>> {
        match cfg.strategy {
            Strategy::Dal(kind) => {
                let ids: Vec<usize> = known.iter().map(|p| p.0).collect();
                let labels: Vec<usize> = known.iter().map(|p| p.1).collect();
                Ok(Some(Classifier::fit(kind, &features.select(&ids)?, &labels, dataset.num_classes)?))
            }
            _ => Ok(None),
        }
    };

    let mut classifier = fit_classifier(&features, &known)?;
    let model = match &classifier {
        Some(c) => Model::Classifier(c, &features),
        None => Model::Network(&net),
    };
    let validation_accuracy = scorer.validation_accuracy(&model)?;
    let (test_accuracy, ci) = scorer.test(&model, 0)?;
    let mut records = vec![IterationRecord {
        iteration: 0,
        selected: Vec::new(),
        annotated: 0,
        fine_tune_size: 0,
        validation_accuracy,
        test_accuracy,
        ci,
        labeled_total: pools.labeled.len(),
        feature_version: features.version,
        network_fingerprint: net.fingerprint(),
    }];
    let mut found = cfg.threshold.is_some_and(|t| test_accuracy >= t);

    for iteration in 1..=cfg.iterations {
        if found || budget <= pools.labeled.len() || pools.labeled.len() + cfg.per_iteration > budget {
            break;
        }
        let select_seed = derive_seed(cfg.seed, &[purpose::SELECT, iteration as u64]);
        let selected = match cfg.strategy {
            Strategy::Dicl => random_select(&pools.pool, cfg.per_iteration, select_seed)?,
            Strategy::Dafl | Strategy::Dal(_) => {
                let emb = badge_from_features(&net, &features, &pools.pool)?;
                kmeanspp_select(&emb, cfg.per_iteration, select_seed)?
            }
        };
        let labels = oracle.annotate(&selected)?;
        let new_batch: Vec<(usize, usize)> = selected.iter().copied().zip(labels).collect();
        let prior = known.clone();
        pools.move_to_labeled(&selected)?;
        known.extend_from_slice(&new_batch);

        let (fine_tune_size, val) = if cfg.strategy.fine_tunes() {
            let mut tune_cfg = cfg.fine_tune.clone();
            tune_cfg.rng_seed = derive_seed(cfg.seed, &[purpose::SHUFFLE, iteration as u64]);
            let round_seed = derive_seed(cfg.seed, &[purpose::REPLAY, iteration as u64]);
            let (tuned, val, size) =
                fine_tune_round(&net, dataset, &new_batch, &prior, &validation, &tune_cfg, &cfg.freeze, round_seed)?;
            net = tuned;
            if cfg.strategy == Strategy::Dafl {
                let fresh = refresh_features(&features, &net, dataset)?;
                features.replace_with(fresh)?;
            }
            (size, Some(val))
        } else {
            classifier = fit_classifier(&features, &known)?;
            (0, None)
        };

        let model = match &classifier {
            Some(c) => Model::Classifier(c, &features),
            None => Model::Network(&net),
        };
        let validation_accuracy = match val {
            Some(v) => v,
            None => scorer.validation_accuracy(&model)?,
        };
        let (test_accuracy, ci) = scorer.test(&model, iteration)?;
        found = cfg.threshold.is_some_and(|t| test_accuracy >= t);
        records.push(IterationRecord {
            iteration,
            selected,
            annotated: new_batch.len(),
            fine_tune_size,
            validation_accuracy,
            test_accuracy,
            ci,
            labeled_total: pools.labeled.len(),
            feature_version: features.version,
            network_fingerprint: net.fingerprint(),
        });
    }

    let model = match &classifier {
        Some(c) => Model::Classifier(c, &features),
        None => Model::Network(&net),
    };
    let remaining = pools.pool.clone();
    let predicted = model.predict(dataset, &remaining)?;
    let mut final_labels: Vec<(usize, usize)> = known.clone();
    final_labels.extend(remaining.into_iter().zip(predicted));
    final_labels.sort_unstable();

    Ok(RunLog {
        config: cfg.clone(),
        budget,
        records,
        final_labels,
        annotation_queries: oracle.queries(),
    })
}

/// Evaluates a network on a labeled index set.
pub fn network_accuracy(net: &NetworkState, dataset: &Dataset, ids: &[usize]) -> Result<f64> {
    evaluate(net, &dataset.examples(ids)?)
}
