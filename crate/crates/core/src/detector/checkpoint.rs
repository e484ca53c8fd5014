//! Checkpoint file layout (all integers little-endian):
//!
//! ```text
//! magic            8 bytes  "AXLDETCK"
//! format version   u32
//! header length    u32      byte length of the JSON header
//! header           JSON     model config, training manifest, block table
//! blocks           f32...   every parameter and buffer in visit order
//! ```
//!
//! Blocks follow the network's visit order: encoder levels from shallow to
//! deep, bottleneck, decoder levels from deep to shallow, head. Within a
//! conv block the batch-norm scale, shift, running mean and running
//! variance come first, then the convolution kernel and bias.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::layers::Visit;
use super::model::ModelConfig;
use super::{DetectorModel, TrainingManifest};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"AXLDETCK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    model_config: ModelConfig,
    manifest: TrainingManifest,
    blocks: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Block {
    len: usize,
    trainable: bool,
}

fn block_table(model: &mut DetectorModel) -> Vec<Block> {
    let mut blocks = Vec::new();
    model.network.visit(&mut |p, trainable| {
        blocks.push(Block {
            len: p.value.len(),
            trainable,
        })
    });
    blocks
}

pub fn checkpoint_bytes(model: &DetectorModel) -> Result<Vec<u8>> {
    let mut model = model.clone();
    let header = Header {
        model_config: *model.config(),
        manifest: model.manifest.clone(),
        blocks: block_table(&mut model),
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    model.network.visit(&mut |p, _| {
        for v in &p.value {
            out.extend_from_slice(&v.to_le_bytes());
        }
    });
    Ok(out)
}

pub fn checkpoint_from_bytes(bytes: &[u8], path: &Path) -> Result<DetectorModel> {
    if bytes.len() < 16 || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(Error::format(path, "not a detector checkpoint"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(Error::format(
            path,
            format!("format version {version}, expected {CHECKPOINT_VERSION}"),
        ));
    }
    let header_len = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let body = bytes
        .get(16..16 + header_len)
        .ok_or_else(|| Error::format(path, "truncated header"))?;
    let header: Header = serde_json::from_slice(body).map_err(|e| Error::format(path, e.to_string()))?;
    let mut model = DetectorModel::new(header.model_config, 0)?;
    if block_table(&mut model) != header.blocks {
        return Err(Error::format(path, "parameter layout does not match the model config"));
    }
    let mut values = bytes[16 + header_len..].chunks_exact(4);
    if values.len() != header.blocks.iter().map(|b| b.len).sum::<usize>() || !values.remainder().is_empty() {
        return Err(Error::format(path, "parameter data has the wrong length"));
    }
    model.network.visit(&mut |p, _| {
        for v in p.value.iter_mut() {
            *v = f32::from_le_bytes(values.next().unwrap().try_into().unwrap());
        }
    });
    model.manifest = header.manifest;
    Ok(model)
}

pub fn write_checkpoint(path: &Path, model: &DetectorModel) -> Result<()> {
    crate::io::write_atomic(path, &checkpoint_bytes(model)?)
}

pub fn read_checkpoint(path: &Path) -> Result<DetectorModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_bytes(&bytes, path)
}
