//! Species-presence detection over long recordings: sliding windows are
//! classified individually, then grouped into fixed-length segments that are
//! reported positive when enough of their windows fire.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{bytes_to_f64s, f64s_to_bytes};
use crate::error::{Error, Result};
use crate::nn::{argmax, build_network, train, Examples, FreezePolicy, NetworkSpec, NetworkState, TrainConfig};
use crate::rng::{derive_seed, purpose, rng_for};

/// Tolerance for comparisons of times that are sums of decimal steps.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowingConfig {
    pub window: f64,
    pub hop: f64,
    pub overlap_threshold: f64,
}

impl Default for WindowingConfig {
    fn default() -> Self {
        WindowingConfig {
            window: 0.6,
            hop: 0.1,
            overlap_threshold: 0.5,
        }
    }
}

impl WindowingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.hop > 0.0 && self.hop <= self.window) {
            return Err(Error::Config(format!("need 0 < hop <= window, got hop {} window {}", self.hop, self.window)));
        }
        if !(self.overlap_threshold > 0.0 && self.overlap_threshold <= 1.0) {
            return Err(Error::Config(format!("overlap threshold {} outside (0,1]", self.overlap_threshold)));
        }
        Ok(())
    }

    pub fn window_samples(&self, rate: f64) -> usize {
        (self.window * rate).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentConfig {
    pub segment: f64,
    /// Minimum number of positive windows for a positive segment (K).
    pub min_slices: usize,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            segment: 5.0,
            min_slices: 4,
        }
    }
}

impl SegmentConfig {
    pub fn validate(&self, windowing: &WindowingConfig) -> Result<()> {
        if self.segment < windowing.window || self.min_slices == 0 {
            return Err(Error::Config("need segment >= window and min_slices >= 1".into()));
        }
        Ok(())
    }
}

/// `ceil(duration / step)`, robust to decimal representation error.
pub fn step_count(duration: f64, step: f64) -> usize {
    ((duration / step) - TIME_EPS).ceil().max(0.0) as usize
}

pub fn window_count(duration: f64, cfg: &WindowingConfig) -> usize {
    step_count(duration, cfg.hop)
}

pub fn segment_count(duration: f64, cfg: &SegmentConfig) -> usize {
    step_count(duration, cfg.segment)
}

/// A long recording with its annotated call intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub samples: Vec<f64>,
    pub rate: f64,
    pub annotations: Vec<Annotation>,
}

impl Stream {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.duration();
        for a in &self.annotations {
            if !(0.0 <= a.start && a.start < a.end && a.end <= d + TIME_EPS) {
                return Err(Error::Contract(format!(
                    "annotation [{}, {}] outside stream of {d} s",
                    a.start, a.end
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StreamSidecar {
    rate: f64,
    annotations: Vec<Annotation>,
}

/// Writes `path` (raw little-endian f64 samples) and `path` with a `.json`
/// extension holding `{rate, annotations}`.
pub fn save_stream(stream: &Stream, path: &Path) -> Result<()> {
    fs::write(path, f64s_to_bytes(&stream.samples)).map_err(|e| Error::io(path, e))?;
    let sidecar = StreamSidecar {
        rate: stream.rate,
        annotations: stream.annotations.clone(),
    };
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    fs::write(&side, text).map_err(|e| Error::io(&side, e))
}

pub fn load_stream(path: &Path) -> Result<Stream> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let samples = bytes_to_f64s(&bytes, &path.display().to_string())?;
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let sidecar: StreamSidecar =
        serde_json::from_str(&text).map_err(|e| Error::parse(side.display().to_string(), e))?;
    let stream = Stream {
        samples,
        rate: sidecar.rate,
        annotations: sidecar.annotations,
    };
    stream.validate()?;
    Ok(stream)
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// One analysis window: its start time and zero-padded samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub start: f64,
    pub samples: Vec<f64>,
}

/// Windows start at `i * hop` for every `i` with `i * hop < duration`; samples
/// past the end of the stream are zero.
pub fn slice_windows(stream: &Stream, cfg: &WindowingConfig) -> Result<Vec<Window>> {
    cfg.validate()?;
    if stream.samples.is_empty() {
        return Err(Error::Contract("stream is empty".into()));
    }
    let len = cfg.window_samples(stream.rate);
    let count = window_count(stream.duration(), cfg);
    Ok((0..count)
        .map(|i| {
            let start = i as f64 * cfg.hop;
            let first = (start * stream.rate).round() as usize;
            let mut samples = vec![0.0; len];
            if first < stream.samples.len() {
                let end = (first + len).min(stream.samples.len());
                samples[..end - first].copy_from_slice(&stream.samples[first..end]);
            }
            Window { start, samples }
        })
        .collect())
}

/// A window is positive iff its overlap with some annotation is at least
/// `overlap_threshold` of the window length.
pub fn label_windows(starts: &[f64], annotations: &[Annotation], cfg: &WindowingConfig) -> Vec<bool> {
    starts
        .iter()
        .map(|&s| {
            let e = s + cfg.window;
            annotations.iter().any(|a| {
                let overlap = (e.min(a.end) - s.max(a.start)).max(0.0);
                overlap / cfg.window >= cfg.overlap_threshold - TIME_EPS
            })
        })
        .collect()
}

/// Segment `j` covers `[j * segment, (j + 1) * segment)`; each window counts
/// toward the segment containing its start.
pub fn aggregate_segments(flags: &[bool], windowing: &WindowingConfig, seg: &SegmentConfig, duration: f64) -> Vec<bool> {
    let mut hits = vec![0usize; segment_count(duration, seg)];
    for (i, _) in flags.iter().enumerate().filter(|(_, &f)| f) {
        let j = ((i as f64 * windowing.hop) / seg.segment + TIME_EPS).floor() as usize;
        if let Some(h) = hits.get_mut(j) {
            *h += 1;
        }
    }
    hits.into_iter().map(|h| h >= seg.min_slices).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Seconds of audio a human must review: every predicted-positive segment.
    pub fn review_seconds(&self, segment: f64) -> f64 {
        (self.tp + self.fp) as f64 * segment
    }

    pub fn add(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }
}

pub fn score_segments(predicted: &[bool], truth: &[bool]) -> Result<ConfusionCounts> {
    if predicted.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predicted segments vs {} ground-truth segments",
            predicted.len(),
            truth.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Binary call / no-call decision for one window.
pub trait WindowClassifier: Sync {
    fn is_call(&self, index: usize, window: &[f64]) -> Result<bool>;
}

/// Class 1 is "call"; the prediction is the argmax of the logits.
impl WindowClassifier for NetworkState {
    fn is_call(&self, _index: usize, window: &[f64]) -> Result<bool> {
        Ok(argmax(&self.logits(window)?) == 1)
    }
}

/// Adapts a closure over (window index, samples).
pub struct FnClassifier<F>(pub F);

impl<F: Fn(usize, &[f64]) -> bool + Sync> WindowClassifier for FnClassifier<F> {
    fn is_call(&self, index: usize, window: &[f64]) -> Result<bool> {
        Ok((self.0)(index, window))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDetail {
    pub index: usize,
    pub start: f64,
    pub positive_windows: usize,
    pub predicted: bool,
    pub truth: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub counts: ConfusionCounts,
    pub segments: Vec<SegmentDetail>,
}

impl Detection {
    pub fn call_segments(&self) -> usize {
        self.segments.iter().filter(|s| s.truth).count()
    }
}

/// Slice, classify every window, aggregate into segments and score against
/// segments that hold at least one annotated window.
pub fn detect_stream(
    classifier: &impl WindowClassifier,
    stream: &Stream,
    windowing: &WindowingConfig,
    seg: &SegmentConfig,
) -> Result<Detection> {
    seg.validate(windowing)?;
    stream.validate()?;
    let windows = slice_windows(stream, windowing)?;
    let predicted_windows: Vec<bool> = windows
        .par_iter()
        .enumerate()
        .map(|(i, w)| classifier.is_call(i, &w.samples))
        .collect::<Result<_>>()?;
    let starts: Vec<f64> = windows.iter().map(|w| w.start).collect();
    let truth_windows = label_windows(&starts, &stream.annotations, windowing);
    let duration = stream.duration();
    let predicted = aggregate_segments(&predicted_windows, windowing, seg, duration);
    let truth = aggregate_segments(
        &truth_windows,
        windowing,
        &SegmentConfig {
            min_slices: 1,
            ..*seg
        },
        duration,
    );
    let counts = score_segments(&predicted, &truth)?;
    let mut positive = vec![0usize; predicted.len()];
    for (i, _) in predicted_windows.iter().enumerate().filter(|(_, &f)| f) {
        let j = ((i as f64 * windowing.hop) / seg.segment + TIME_EPS).floor() as usize;
        if let Some(p) = positive.get_mut(j) {
            *p += 1;
        }
    }
    let segments = (0..predicted.len())
        .map(|j| SegmentDetail {
            index: j,
            start: j as f64 * seg.segment,
            positive_windows: positive[j],
            predicted: predicted[j],
            truth: truth[j],
        })
        .collect();
    Ok(Detection { counts, segments })
}

/// One row per file: `file,segments,call_segments,tp,fp,fn,tn`.
pub fn detection_table(rows: &[(String, Detection)]) -> String {
    let mut out = String::from("file,segments,call_segments,tp,fp,fn,tn\n");
    for (name, d) in rows {
        let c = d.counts;
        let _ = writeln!(
            out,
            "{name},{},{},{},{},{},{}",
            d.segments.len(),
            d.call_segments(),
            c.tp,
            c.fp,
            c.fn_,
            c.tn
        );
    }
    out
}

/// Synthetic long recording with planted calls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StreamSynthConfig {
    pub duration: f64,
    pub rate: f64,
    pub calls: usize,
    /// Call length range in seconds.
    pub call_min: f64,
    pub call_max: f64,
    /// Call carrier frequency in Hz; the call sweeps up by 20% over its length.
    pub call_freq: f64,
    pub call_amplitude: f64,
    pub noise_std: f64,
    /// Pure-tone distractors at `distractor_freq`, not annotated.
    pub distractors: usize,
    pub distractor_freq: f64,
    pub seed: u64,
}

impl Default for StreamSynthConfig {
    fn default() -> Self {
        StreamSynthConfig {
            duration: 600.0,
            rate: 2000.0,
            calls: 12,
            call_min: 0.6,
            call_max: 0.672,
            call_freq: 300.0,
            call_amplitude: 0.5,
            noise_std: 0.1,
            distractors: 12,
            distractor_freq: 120.0,
            seed: 0,
        }
    }
}

fn call_waveform(len: usize, rate: f64, freq: f64, amp: f64, phase: f64) -> impl Iterator<Item = f64> {
    (0..len).map(move |t| {
        let x = t as f64 / len as f64;
        let f = freq * (1.0 + 0.2 * x);
        let env = (PI * x).sin();
        amp * env * (2.0 * PI * f * t as f64 / rate + phase).sin()
    })
}

/// Builds a noise bed with `calls` annotated sweeps and unannotated distractor
/// tones placed in non-overlapping slots.
pub fn synth_stream(cfg: &StreamSynthConfig) -> Result<Stream> {
    if !(cfg.duration > 0.0 && cfg.rate > 0.0 && cfg.call_min > 0.0 && cfg.call_max >= cfg.call_min) {
        return Err(Error::Config("invalid stream synthesis parameters".into()));
    }
    if cfg.call_freq * 1.2 >= cfg.rate / 2.0 {
        return Err(Error::Config("call frequency violates Nyquist".into()));
    }
    let mut rng = rng_for(cfg.seed, &[purpose::STREAM]);
    let n = (cfg.duration * cfg.rate).round() as usize;
    let noise = Normal::new(0.0, cfg.noise_std.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
    let mut samples: Vec<f64> = (0..n).map(|_| noise.sample(&mut rng)).collect();

    // one event per slot, placed at a random offset inside its slot
    let events = cfg.calls + cfg.distractors;
    let slot = cfg.duration / events.max(1) as f64;
    if events > 0 && slot < cfg.call_max * 1.5 {
        return Err(Error::Config("too many events for the stream duration".into()));
    }
    let mut kinds: Vec<bool> = (0..events).map(|k| k < cfg.calls).collect();
    kinds.shuffle(&mut rng);
    let mut annotations = Vec::new();
    for (k, &is_call) in kinds.iter().enumerate() {
        let length = rng.gen_range(cfg.call_min..=cfg.call_max);
        let start = k as f64 * slot + rng.gen_range(0.0..(slot - length));
        let first = (start * cfg.rate).round() as usize;
        let len = ((length * cfg.rate).round() as usize).min(n - first);
        let phase = rng.gen_range(0.0..2.0 * PI);
        let freq = if is_call { cfg.call_freq } else { cfg.distractor_freq };
        for (s, v) in samples[first..first + len]
            .iter_mut()
            .zip(call_waveform(len, cfg.rate, freq, cfg.call_amplitude, phase))
        {
            *s += v;
        }
        if is_call {
            annotations.push(Annotation {
                start: first as f64 / cfg.rate,
                end: (first + len) as f64 / cfg.rate,
            });
        }
    }
    crate::data::normalize_peak(&mut samples);
    Ok(Stream {
        samples,
        rate: cfg.rate,
        annotations,
    })
}

/// Labeled windows for detector training: all positive windows plus
/// `negative_ratio` times as many randomly drawn negatives. Imbalance toward
/// negatives biases the detector toward false negatives.
pub fn window_training_set(
    stream: &Stream,
    cfg: &WindowingConfig,
    negative_ratio: f64,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let windows = slice_windows(stream, cfg)?;
    let starts: Vec<f64> = windows.iter().map(|w| w.start).collect();
    let flags = label_windows(&starts, &stream.annotations, cfg);
    let positives: Vec<usize> = (0..windows.len()).filter(|&i| flags[i]).collect();
    let negatives: Vec<usize> = (0..windows.len()).filter(|&i| !flags[i]).collect();
    let wanted = ((positives.len() as f64 * negative_ratio).round() as usize).min(negatives.len());
    let mut rng = rng_for(seed, &[purpose::SHUFFLE]);
    let chosen = rand::seq::index::sample(&mut rng, negatives.len(), wanted);
    let mut inputs = Vec::with_capacity(positives.len() + wanted);
    let mut labels = Vec::with_capacity(positives.len() + wanted);
    for &i in &positives {
        inputs.push(windows[i].samples.clone());
        labels.push(1);
    }
    for k in chosen {
        inputs.push(windows[negatives[k]].samples.clone());
        labels.push(0);
    }
    Ok((inputs, labels))
}

/// Trains a two-class window detector on windows drawn from `streams`. One
/// fifth of the windows is held out for checkpoint selection.
pub fn train_detector(
    streams: &[Stream],
    windowing: &WindowingConfig,
    spec: NetworkSpec,
    config: &TrainConfig,
    negative_ratio: f64,
    seed: u64,
) -> Result<NetworkState> {
    if spec.num_classes != 2 {
        return Err(Error::Config(format!("a detector has 2 classes, spec has {}", spec.num_classes)));
    }
    let mut inputs = Vec::new();
    let mut labels = Vec::new();
    for (k, stream) in streams.iter().enumerate() {
        if spec.input_length != windowing.window_samples(stream.rate) {
            return Err(Error::Config(format!(
                "network input length {} differs from the {}-sample window of stream {k}",
                spec.input_length,
                windowing.window_samples(stream.rate)
            )));
        }
        let (x, y) = window_training_set(stream, windowing, negative_ratio, derive_seed(seed, &[k as u64]))?;
        inputs.extend(x);
        labels.extend(y);
    }
    if inputs.len() < 2 {
        return Err(Error::Contract("too few training windows".into()));
    }
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    order.shuffle(&mut rng_for(seed, &[purpose::SPLIT]));
    let held = (inputs.len() / 5).max(1);
    let pick = |ids: &[usize]| -> (Vec<&[f64]>, Vec<usize>) {
        (ids.iter().map(|&i| inputs[i].as_slice()).collect(), ids.iter().map(|&i| labels[i]).collect())
    };
    let (vx, vy) = pick(&order[..held]);
    let (tx, ty) = pick(&order[held..]);
    let net = build_network(spec)?;
    let (trained, _) = train(
        &net,
        &Examples::new(tx, ty),
        &Examples::new(vx, vy),
        config,
        &FreezePolicy::NoFreeze,
    )?;
    Ok(trained)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(seconds: f64, rate: f64, annotations: Vec<Annotation>) -> Stream {
        Stream {
            samples: vec![0.0; (seconds * rate).round() as usize],
            rate,
            annotations,
        }
    }

    #[test]
    fn window_counts() {
        let cfg = WindowingConfig::default();
        let s = stream(5.0, 100.0, vec![]);
        assert_eq!(slice_windows(&s, &cfg).unwrap().len(), 50);

        let s = Stream {
            samples: vec![1.0; 60],
            rate: 100.0,
            annotations: vec![],
        };
        let w = slice_windows(&s, &cfg).unwrap();
        assert_eq!(w.len(), 6);
        assert!(w[0].samples.iter().all(|&v| v == 1.0));
        for (k, win) in w.iter().enumerate().skip(1) {
            // window k starts 10k samples in, so the last 10k are padding
            assert!(win.samples[60 - 10 * k..].iter().all(|&v| v == 0.0));
            assert!(win.samples[..60 - 10 * k].iter().all(|&v| v == 1.0));
        }
        assert_eq!(cfg.window_samples(20_000.0), 12_000);
    }

    #[test]
    fn overlap_labels() {
        let cfg = WindowingConfig::default();
        let starts: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        assert!(label_windows(&starts, &[], &cfg).iter().all(|&f| !f));

        let ann = [Annotation { start: 1.0, end: 1.6 }];
        let flags = label_windows(&starts, &ann, &cfg);
        assert!(flags[10] && flags[9] && flags[11]);
        // 0.7 s offset leaves no overlap; 0.4 s leaves 0.2/0.6 < 0.5
        assert!(!flags[3] && !flags[6] && !flags[14]);
        assert!(flags[8] && flags[12]);

        let strict = WindowingConfig {
            overlap_threshold: 1.0,
            ..cfg
        };
        let short = [Annotation { start: 1.0, end: 1.3 }];
        assert!(label_windows(&starts, &short, &strict).iter().all(|&f| !f));
    }

    #[test]
    fn aggregation_rules() {
        let w = WindowingConfig::default();
        let seg = SegmentConfig::default();
        let mut flags = vec![false; 100];
        flags[1] = true;
        flags[2] = true;
        flags[3] = true;
        assert_eq!(aggregate_segments(&flags, &w, &seg, 10.0), vec![false, false]);
        flags[49] = true;
        assert_eq!(aggregate_segments(&flags, &w, &seg, 10.0), vec![true, false]);
        assert_eq!(aggregate_segments(&vec![true; 100], &w, &seg, 10.0), vec![true, true]);
        assert_eq!(segment_count(7200.0, &seg), 1440);
    }

    #[test]
    fn confusion_and_review() {
        let c = score_segments(&[true, true, false, false], &[true, false, true, false]).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (1, 1, 1, 1));
        assert!(score_segments(&[true], &[]).is_err());
        let table7 = ConfusionCounts {
            tp: 21,
            fp: 8,
            fn_: 50,
            tn: 8561,
        };
        assert_eq!(table7.total(), 8640);
        assert_eq!(table7.review_seconds(5.0), 145.0);
    }

    #[test]
    fn oracle_and_silent_classifiers() {
        let cfg = StreamSynthConfig {
            duration: 120.0,
            rate: 200.0,
            call_freq: 50.0,
            distractor_freq: 20.0,
            calls: 5,
            distractors: 5,
            ..StreamSynthConfig::default()
        };
        let s = synth_stream(&cfg).unwrap();
        let w = WindowingConfig::default();
        let seg = SegmentConfig::default();
        let starts: Vec<f64> = slice_windows(&s, &w).unwrap().iter().map(|x| x.start).collect();
        let truth = label_windows(&starts, &s.annotations, &w);
        let oracle = FnClassifier(|i: usize, _: &[f64]| truth[i]);
        let d = detect_stream(&oracle, &s, &w, &seg).unwrap();
        let thin = d.segments.iter().filter(|g| g.truth && g.positive_windows < 4).count();
        assert_eq!(d.counts.fp, 0);
        assert_eq!(d.counts.fn_, thin);
        assert_eq!(d.counts.total(), 24);

        let seg_truth: Vec<bool> = d.segments.iter().map(|g| g.truth).collect();
        let oracle = FnClassifier(|i: usize, _: &[f64]| seg_truth[i / 50]);
        let d = detect_stream(&oracle, &s, &w, &seg).unwrap();
        assert_eq!((d.counts.fp, d.counts.fn_), (0, 0));

        let silent = FnClassifier(|_: usize, _: &[f64]| false);
        let d = detect_stream(&silent, &s, &w, &seg).unwrap();
        assert_eq!((d.counts.tp, d.counts.fp), (0, 0));
        assert_eq!(d.counts.fn_, d.call_segments());
        assert!(d.call_segments() >= 5);
    }

    #[test]
    fn stream_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = StreamSynthConfig {
            duration: 30.0,
            rate: 200.0,
            call_freq: 50.0,
            distractor_freq: 20.0,
            calls: 3,
            distractors: 2,
            ..StreamSynthConfig::default()
        };
        let s = synth_stream(&cfg).unwrap();
        let path = dir.path().join("site.f64");
        save_stream(&s, &path).unwrap();
        assert!(dir.path().join("site.json").exists());
        assert_eq!(load_stream(&path).unwrap(), s);
    }

    #[test]
    fn table_layout() {
        let d = Detection {
            counts: ConfusionCounts {
                tp: 1,
                fp: 2,
                fn_: 3,
                tn: 4,
            },
            segments: vec![
                SegmentDetail {
                    index: 0,
                    start: 0.0,
                    positive_windows: 0,
                    predicted: false,
                    truth: true,
                };
                10
            ],
        };
        let t = detection_table(&[("a.f64".into(), d)]);
        assert_eq!(t, "file,segments,call_segments,tp,fp,fn,tn\na.f64,10,10,1,2,3,4\n");
    }
}
