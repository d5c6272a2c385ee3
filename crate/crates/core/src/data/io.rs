//! Dataset directory layout: `manifest.json` plus one raw little-endian f64
//! file per clip.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AudioClip, Dataset};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    num_classes: usize,
    clips: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    id: String,
    file: String,
    rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<usize>,
}

pub fn f64s_to_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn bytes_to_f64s(bytes: &[u8], what: &str) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::parse(what, format!("length {} is not a multiple of 8", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn save_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(dataset.len());
    for clip in &dataset.clips {
        let file = format!("{}.f64", clip.id);
        let path = dir.join(&file);
        fs::write(&path, f64s_to_bytes(&clip.samples)).map_err(|e| Error::io(&path, e))?;
        entries.push(ManifestEntry {
            id: clip.id.clone(),
            file,
            rate: clip.rate,
            label: clip.label,
        });
    }
    let manifest = Manifest {
        num_classes: dataset.num_classes,
        clips: entries,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| {
        Error::parse(
            path.display().to_string(),
            format!("line {} column {}: {e}", e.line(), e.column()),
        )
    })?;
    let mut ids = HashSet::new();
    let mut clips = Vec::with_capacity(manifest.clips.len());
    for entry in manifest.clips {
        if !ids.insert(entry.id.clone()) {
            return Err(Error::parse(MANIFEST_FILE, format!("duplicate id {}", entry.id)));
        }
        let sample_path = dir.join(&entry.file);
        let bytes = fs::read(&sample_path).map_err(|e| {
            Error::parse(
                MANIFEST_FILE,
                format!("clip {}: cannot read {}: {e}", entry.id, sample_path.display()),
            )
        })?;
        let samples = bytes_to_f64s(&bytes, &format!("samples of clip {}", entry.id))?;
        clips.push(AudioClip {
            id: entry.id,
            samples,
            rate: entry.rate,
            label: entry.label,
        });
    }
    Dataset::new(clips, manifest.num_classes)
}
