use serde::{Deserialize, Serialize};

use super::synth::add_noise;
use super::{normalize_peak, AudioClip};
use crate::error::{Error, Result};
use crate::rng::{purpose, rng_for};

/// Augmentation transforms and the meaning of `magnitude` for each:
///
/// | kind          | magnitude                          | range        |
/// |---------------|------------------------------------|--------------|
/// | noise         | SNR in dB                          | [-20, 80]    |
/// | time_shift    | shift as a fraction of the length  | [-1, 1]      |
/// | time_stretch  | stretch factor (>1 slows down)     | [0.25, 4]    |
/// | pitch_shift   | playback-speed factor (>1 raises)  | [0.25, 4]    |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentKind {
    Noise,
    TimeShift,
    TimeStretch,
    PitchShift,
}

impl AugmentKind {
    fn range(self) -> (f64, f64) {
        match self {
            AugmentKind::Noise => (-20.0, 80.0),
            AugmentKind::TimeShift => (-1.0, 1.0),
            AugmentKind::TimeStretch | AugmentKind::PitchShift => (0.25, 4.0),
        }
    }
}

/// Linear interpolation of `x` at fractional position `pos`; zero outside.
fn interp(x: &[f64], pos: f64) -> f64 {
    if pos < 0.0 || pos > (x.len() - 1) as f64 {
        return 0.0;
    }
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if frac == 0.0 || i + 1 >= x.len() {
        x[i]
    } else {
        x[i] * (1.0 - frac) + x[i + 1] * frac
    }
}

/// Reads `x` at positions `i * step` for `i < len`; positions past the end read zero.
fn read_at_rate(x: &[f64], step: f64, len: usize) -> Vec<f64> {
    (0..len).map(|i| interp(x, i as f64 * step)).collect()
}

pub fn augment(clip: &AudioClip, kind: AugmentKind, magnitude: f64, seed: u64) -> Result<AudioClip> {
    if clip.samples.is_empty() {
        return Err(Error::Contract(format!("clip {} is empty", clip.id)));
    }
    let (lo, hi) = kind.range();
    if !(lo..=hi).contains(&magnitude) {
        return Err(Error::Config(format!(
            "{kind:?} magnitude {magnitude} outside [{lo}, {hi}]"
        )));
    }
    let n = clip.samples.len();
    let x = &clip.samples;
    let mut samples = match kind {
        AugmentKind::Noise => {
            let mut rng = rng_for(seed, &[purpose::AUGMENT]);
            let mut out = x.clone();
            add_noise(&mut out, magnitude, &mut rng);
            out
        }
        AugmentKind::TimeShift => {
            let shift = (magnitude.abs() * n as f64).floor() as usize;
            let mut out = vec![0.0; n];
            if shift < n {
                if magnitude >= 0.0 {
                    out[shift..].copy_from_slice(&x[..n - shift]);
                } else {
                    out[..n - shift].copy_from_slice(&x[shift..]);
                }
            }
            out
        }
        // stretched signal y(t) = x(t / factor), cropped/padded to n samples
        AugmentKind::TimeStretch => read_at_rate(x, 1.0 / magnitude, n),
        // played back `factor` times faster without duration compensation
        AugmentKind::PitchShift => read_at_rate(x, magnitude, n),
    };
    normalize_peak(&mut samples);
    Ok(AudioClip {
        id: clip.id.clone(),
        samples,
        rate: clip.rate,
        label: clip.label,
    })
}

/// Linear-interpolation resampling; the output has `round(duration * new_rate)` samples.
pub fn resample(clip: &AudioClip, new_rate: f64) -> Result<AudioClip> {
    if !(new_rate > 0.0) {
        return Err(Error::Config(format!("new rate must be positive, got {new_rate}")));
    }
    if new_rate == clip.rate {
        return Ok(clip.clone());
    }
    let len = (clip.samples.len() as f64 * new_rate / clip.rate).round() as usize;
    let step = clip.rate / new_rate;
    let last = (clip.samples.len() - 1) as f64;
    let samples = (0..len)
        .map(|i| interp(&clip.samples, (i as f64 * step).min(last)))
        .collect();
    Ok(AudioClip {
        id: clip.id.clone(),
        samples,
        rate: new_rate,
        label: clip.label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(freq: f64, rate: f64, seconds: f64, amp: f64) -> AudioClip {
        let n = (rate * seconds).round() as usize;
        AudioClip {
            id: "tone".into(),
            samples: (0..n).map(|t| amp * (2.0 * PI * freq * t as f64 / rate).sin()).collect(),
            rate,
            label: Some(0),
        }
    }

    /// Frequency of the largest-magnitude DFT bin, by direct summation.
    fn dominant_frequency(clip: &AudioClip) -> f64 {
        let n = clip.samples.len();
        let mut best = (0, 0.0);
        for k in 1..n / 2 {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &x) in clip.samples.iter().enumerate() {
                let a = 2.0 * PI * (k * t) as f64 / n as f64;
                re += x * a.cos();
                im -= x * a.sin();
            }
            let mag = re * re + im * im;
            if mag > best.1 {
                best = (k, mag);
            }
        }
        best.0 as f64 * clip.rate / n as f64
    }

    #[test]
    fn identities() {
        let clip = tone(50.0, 1000.0, 0.5, 0.8);
        assert_eq!(augment(&clip, AugmentKind::TimeShift, 0.0, 1).unwrap(), clip);
        let stretched = augment(&clip, AugmentKind::TimeStretch, 1.0, 1).unwrap();
        for (a, b) in stretched.samples.iter().zip(&clip.samples) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(resample(&clip, 1000.0).unwrap(), clip);
    }

    #[test]
    fn every_kind_preserves_length_and_range() {
        let clip = tone(50.0, 1000.0, 0.5, 1.0);
        for (kind, mag) in [
            (AugmentKind::Noise, 0.0),
            (AugmentKind::TimeShift, 0.3),
            (AugmentKind::TimeShift, -0.6),
            (AugmentKind::TimeStretch, 1.7),
            (AugmentKind::TimeStretch, 0.6),
            (AugmentKind::PitchShift, 1.5),
            (AugmentKind::PitchShift, 0.7),
        ] {
            let out = augment(&clip, kind, mag, 9).unwrap();
            assert_eq!(out.samples.len(), clip.samples.len(), "{kind:?}");
            assert!(out.samples.iter().all(|v| v.abs() <= 1.0), "{kind:?}");
        }
    }

    #[test]
    fn time_shift_moves_samples() {
        let clip = AudioClip {
            id: "r".into(),
            samples: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            rate: 5.0,
            label: None,
        };
        let out = augment(&clip, AugmentKind::TimeShift, 0.4, 0).unwrap();
        assert_eq!(out.samples, vec![0.0, 0.0, 0.1, 0.2, 0.3]);
        let out = augment(&clip, AugmentKind::TimeShift, -0.4, 0).unwrap();
        assert_eq!(out.samples, vec![0.3, 0.4, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn noise_hits_requested_snr() {
        let clip = tone(37.0, 4000.0, 1.0, 0.3);
        let signal: f64 = clip.samples.iter().map(|v| v * v).sum();
        for seed in 0..100 {
            let out = augment(&clip, AugmentKind::Noise, 20.0, seed).unwrap();
            let noise: f64 = out.samples.iter().zip(&clip.samples).map(|(o, i)| (o - i).powi(2)).sum();
            let snr = 10.0 * (signal / noise).log10();
            assert!((snr - 20.0).abs() <= 1.0, "seed {seed}: {snr} dB");
        }
        let a = augment(&clip, AugmentKind::Noise, 20.0, 4).unwrap();
        assert_eq!(a, augment(&clip, AugmentKind::Noise, 20.0, 4).unwrap());
    }

    #[test]
    fn pitch_shift_scales_frequency() {
        let clip = tone(100.0, 2000.0, 0.5, 0.5);
        let out = augment(&clip, AugmentKind::PitchShift, 2.0, 0).unwrap();
        // the first half of the output carries the doubled tone
        let head = AudioClip {
            samples: out.samples[..500].to_vec(),
            ..out.clone()
        };
        assert_eq!(dominant_frequency(&head), 200.0);
    }

    #[test]
    fn out_of_range_magnitudes_are_rejected() {
        let clip = tone(10.0, 100.0, 1.0, 0.5);
        assert!(augment(&clip, AugmentKind::TimeShift, 1.5, 0).is_err());
        assert!(augment(&clip, AugmentKind::TimeStretch, 0.0, 0).is_err());
        assert!(augment(&clip, AugmentKind::Noise, 200.0, 0).is_err());
    }

    #[test]
    fn resample_lengths_and_spectrum() {
        let one_second = tone(100.0, 4000.0, 1.0, 0.5);
        let up = resample(&one_second, 20_000.0).unwrap();
        assert_eq!(up.samples.len(), 20_000);
        assert!((up.duration() - one_second.duration()).abs() <= 1.0 / 4000.0);

        let short = tone(100.0, 4000.0, 0.25, 0.5);
        let doubled = resample(&short, 8000.0).unwrap();
        assert_eq!(doubled.samples.len(), 2000);
        assert_eq!(dominant_frequency(&doubled), 100.0);
    }
}
