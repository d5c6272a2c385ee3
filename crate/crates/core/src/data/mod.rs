//! Audio clips, datasets, pool splits, augmentation and on-disk format.

mod augment;
mod io;
mod split;
mod synth;

pub use augment::{augment, resample, AugmentKind};
pub(crate) use io::{bytes_to_f64s, f64s_to_bytes};
pub use io::{load_dataset, save_dataset, MANIFEST_FILE};
pub use split::{split_pools, PoolState, SplitConfig};
pub use synth::{generate_synthetic, SynthConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Examples;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioClip {
    pub id: String,
    pub samples: Vec<f64>,
    pub rate: f64,
    pub label: Option<usize>,
}

impl AudioClip {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }

    /// Scales the clip so its peak magnitude is at most 1.
    pub fn normalize(&mut self) {
        normalize_peak(&mut self.samples);
    }
}

/// Divides by the peak magnitude when it exceeds 1.
pub fn normalize_peak(samples: &mut [f64]) {
    let peak = samples.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if peak > 1.0 {
        samples.iter_mut().for_each(|v| *v /= peak);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub clips: Vec<AudioClip>,
    pub num_classes: usize,
}

impl Dataset {
    pub fn new(clips: Vec<AudioClip>, num_classes: usize) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for clip in &clips {
            if clip.samples.is_empty() {
                return Err(Error::Contract(format!("clip {} has no samples", clip.id)));
            }
            if !seen.insert(clip.id.as_str()) {
                return Err(Error::Contract(format!("duplicate clip id {}", clip.id)));
            }
            if let Some(l) = clip.label {
                if l >= num_classes {
                    return Err(Error::Contract(format!(
                        "clip {} has label {l} but only {num_classes} classes",
                        clip.id
                    )));
                }
            }
        }
        Ok(Dataset { clips, num_classes })
    }

    pub fn len(&self) -> usize {
        self.clips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clips.is_empty()
    }

    pub fn label(&self, i: usize) -> Result<usize> {
        self.clips[i]
            .label
            .ok_or_else(|| Error::Contract(format!("clip {} is unlabeled", self.clips[i].id)))
    }

    pub fn inputs(&self, indices: &[usize]) -> Vec<&[f64]> {
        indices.iter().map(|&i| self.clips[i].samples.as_slice()).collect()
    }

    /// Labeled view over `indices`; fails if any clip lacks a label.
    pub fn examples(&self, indices: &[usize]) -> Result<Examples<'_>> {
        let labels = indices.iter().map(|&i| self.label(i)).collect::<Result<Vec<_>>>()?;
        Ok(Examples::new(self.inputs(indices), labels))
    }

    pub fn class_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.num_classes];
        for c in &self.clips {
            if let Some(l) = c.label {
                h[l] += 1;
            }
        }
        h
    }
}
