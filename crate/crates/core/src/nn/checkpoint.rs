//! Binary checkpoint format, little-endian throughout:
//!
//! ```text
//! b"DAFLNET1" | u64 spec_len | spec_len bytes of JSON spec | f64 arrays
//! ```
//!
//! The arrays are written layer by layer, weights then bias, for every layer
//! that carries parameters.

use std::fs;
use std::path::Path;

use super::network::{LayerParams, NetworkState};
use super::spec::NetworkSpec;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"DAFLNET1";

pub fn encode(net: &NetworkState) -> Vec<u8> {
    let spec = serde_json::to_vec(&net.spec).expect("spec serializes");
    let mut out = Vec::with_capacity(16 + spec.len() + 8 * net.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(spec.len() as u64).to_le_bytes());
    out.extend_from_slice(&spec);
    for p in &net.params {
        for v in p.weights.iter().chain(&p.bias) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<NetworkState> {
    let bad = |m: &str| Error::parse("checkpoint", m);
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(bad("missing DAFLNET1 header"));
    }
    let spec_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let spec_end = 16usize
        .checked_add(spec_len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| bad("truncated spec document"))?;
    let spec: NetworkSpec =
        serde_json::from_slice(&bytes[16..spec_end]).map_err(|e| Error::parse("checkpoint spec", e))?;
    let layout = spec.layout()?;
    let mut cursor = spec_end;
    let mut read = |n: usize| -> Result<Vec<f64>> {
        let end = cursor + 8 * n;
        if end > bytes.len() {
            return Err(bad("truncated parameter data"));
        }
        let v = bytes[cursor..end]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        cursor = end;
        Ok(v)
    };
    let mut params = Vec::with_capacity(spec.blocks.len());
    for i in 0..spec.blocks.len() {
        let (nw, nb) = layout.param_shape(&spec.blocks, i);
        params.push(LayerParams {
            weights: read(nw)?,
            bias: read(nb)?,
        });
    }
    if cursor != bytes.len() {
        return Err(bad("trailing bytes after parameter data"));
    }
    NetworkState::from_parts(spec, params)
}

pub fn save(net: &NetworkState, path: &Path) -> Result<()> {
    fs::write(path, encode(net)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<NetworkState> {
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
