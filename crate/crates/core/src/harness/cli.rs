use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::config::{read_json, DetectConfig, ExperimentConfig};
use super::experiment::{prepare_seed, run_experiment, significance_from_runs, split_for_seed, RunRecord};
use super::table::ComparisonTable;
use super::{log, write_atomic};
use crate::alloop::Strategy;
use crate::data::save_dataset;
use crate::detect::{detect_stream, detection_table, load_stream, synth_stream, train_detector, Stream};
use crate::error::{Error, Result};
use crate::eval::export_report;
use crate::nn::checkpoint;

#[derive(Debug, Parser)]
#[command(name = "dafl", about = "Active learning experiments for raw-audio classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the configured synthetic dataset into <out>/dataset.
    Synth(Common),
    /// Write the per-seed pool partitions to <out>/splits.
    Split(Common),
    /// Train the initial network per seed into <out>/pretrain.
    Pretrain(Common),
    /// Run every strategy for every seed.
    #[command(name = "al-run")]
    AlRun(Common),
    /// Run the long-recording detection pipeline.
    Detect(Common),
    /// Significance tests over the run logs in <out>/runs.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    strategies: Vec<String>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit status: 0 on success, 2 for usage or
/// configuration errors, 1 for runtime failures.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse { .. } => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    let threads = match &command {
        Command::Synth(c)
        | Command::Split(c)
        | Command::Pretrain(c)
        | Command::AlRun(c)
        | Command::Detect(c) => c.threads,
        Command::Report(r) => r.common.threads,
    };
    let pool = match threads {
        Some(0) => return Err(Error::Config("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match command {
        Command::Synth(c) => synth(&c),
        Command::Split(c) => split(&c),
        Command::Pretrain(c) => pretrain(&c),
        Command::AlRun(c) => al_run(&c),
        Command::Detect(c) => detect(&c),
        Command::Report(r) => report(&r),
    })
}

fn experiment_config(c: &Common) -> Result<(ExperimentConfig, PathBuf)> {
    let path = c
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut cfg: ExperimentConfig = read_json(path)?;
    if !c.seeds.is_empty() {
        cfg.seeds = c.seeds.clone();
    }
    if !c.strategies.is_empty() {
        cfg.strategies = c.strategies.iter().map(|s| s.parse()).collect::<Result<Vec<Strategy>>>()?;
    }
    let out = c
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| Error::Config("no output directory: pass --out or set \"output\"".into()))?;
    // the tree must not depend on where it is written
    cfg.output = None;
    cfg.validate()?;
    Ok((cfg, out))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn synth(c: &Common) -> Result<()> {
    let (cfg, out) = experiment_config(c)?;
    let dataset = cfg.dataset.load()?;
    let dir = out.join("dataset");
    save_dataset(&dataset, &dir)?;
    log::info(&format!("wrote {} clips to {}", dataset.len(), dir.display()));
    Ok(())
}

fn split(c: &Common) -> Result<()> {
    let (cfg, out) = experiment_config(c)?;
    let dataset = cfg.dataset.load()?;
    for &seed in &cfg.seeds {
        let pools = split_for_seed(&dataset, &cfg, seed)?;
        write_json(&out.join("splits").join(format!("seed{seed}.json")), &pools)?;
    }
    Ok(())
}

fn pretrain(c: &Common) -> Result<()> {
    let (cfg, out) = experiment_config(c)?;
    let dataset = cfg.dataset.load()?;
    for &seed in &cfg.seeds {
        let setup = prepare_seed(&dataset, &cfg, seed)?;
        let dir = out.join("pretrain");
        write_atomic(&dir.join(format!("seed{seed}.net")), &checkpoint::encode(&setup.network))?;
        write_json(&dir.join(format!("seed{seed}-split.json")), &setup.pools)?;
    }
    Ok(())
}

fn al_run(c: &Common) -> Result<()> {
    let (cfg, out) = experiment_config(c)?;
    let dataset = cfg.dataset.load()?;
    let runs = run_experiment(&dataset, &cfg)?;
    write_json(&out.join("config.json"), &cfg)?;
    let runs_dir = out.join("runs");
    for run in &runs {
        write_json(&runs_dir.join(format!("{}.json", run.file_stem())), run)?;
        write_atomic(&runs_dir.join(format!("{}.csv", run.file_stem())), run.log.to_csv().as_bytes())?;
    }
    let table = ComparisonTable::from_runs(&runs)?;
    write_atomic(&out.join("comparison.csv"), table.to_csv(cfg.percent).as_bytes())?;
    log::info(&format!("wrote {} run logs to {}", runs.len(), runs_dir.display()));
    Ok(())
}

fn load_runs(dir: &Path) -> Result<Vec<RunRecord>> {
    if !dir.is_dir() {
        return Err(Error::Config(format!("run directory {} does not exist", dir.display())));
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::parse(p.display().to_string(), e))
        })
        .collect()
}

fn report(r: &ReportArgs) -> Result<()> {
    let out = r
        .common
        .out
        .clone()
        .ok_or_else(|| Error::Config("--out <dir> holding runs/ is required".into()))?;
    let runs = load_runs(&out.join("runs"))?;
    let report = significance_from_runs(&runs, r.alpha)?;
    export_report(&report, &out.join("significance.json"))?;
    for (m, rank) in report.methods.iter().zip(&report.average_ranks) {
        log::info(&format!("{m}: average rank {rank:.3}"));
    }
    Ok(())
}

fn named_streams(paths: &[PathBuf], synthetic: &[crate::detect::StreamSynthConfig], prefix: &str) -> Result<Vec<(String, Stream)>> {
    let mut out = Vec::new();
    for p in paths {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        out.push((name, load_stream(p)?));
    }
    for (k, cfg) in synthetic.iter().enumerate() {
        out.push((format!("{prefix}-{k}"), synth_stream(cfg)?));
    }
    Ok(out)
}

fn detect(c: &Common) -> Result<()> {
    let path = c
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let cfg: DetectConfig = read_json(path)?;
    let out = c
        .out
        .clone()
        .ok_or_else(|| Error::Config("--out <dir> is required".into()))?;
    cfg.windowing.validate()?;
    cfg.segment.validate(&cfg.windowing)?;
    let streams = named_streams(&cfg.streams, &cfg.synthetic_streams, "synthetic")?;
    if streams.is_empty() {
        return Err(Error::Config("no streams to analyse".into()));
    }
    let net = match &cfg.checkpoint {
        Some(p) => checkpoint::load(p)?,
        None => {
            let training = named_streams(&cfg.training_streams, &cfg.synthetic_training, "training")?;
            let Some((_, first)) = training.first() else {
                return Err(Error::Config("need a checkpoint or training streams".into()));
            };
            let spec = cfg.network.spec(cfg.windowing.window_samples(first.rate), 2, cfg.seed);
            let streams: Vec<Stream> = training.into_iter().map(|(_, s)| s).collect();
            let net = train_detector(&streams, &cfg.windowing, spec, &cfg.train, cfg.negative_ratio, cfg.seed)?;
            write_atomic(&out.join("detector.net"), &checkpoint::encode(&net))?;
            net
        }
    };
    let mut rows = Vec::new();
    for (name, stream) in &streams {
        let d = detect_stream(&net, stream, &cfg.windowing, &cfg.segment)?;
        log::info(&format!(
            "{name}: {} segments, tp {} fp {} fn {} tn {}, review {:.0} s",
            d.segments.len(),
            d.counts.tp,
            d.counts.fp,
            d.counts.fn_,
            d.counts.tn,
            d.counts.review_seconds(cfg.segment.segment)
        ));
        rows.push((name.clone(), d));
    }
    write_atomic(&out.join("detection.csv"), detection_table(&rows).as_bytes())?;
    let details: Vec<_> = rows.iter().map(|(n, d)| serde_json::json!({ "file": n, "detection": d })).collect();
    write_json(&out.join("detection.json"), &details)
}
