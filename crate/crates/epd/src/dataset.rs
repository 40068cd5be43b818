//! Dataset sources.
//!
//! Besides the synthetic blobs from [`epd_core::data`], small image sets can
//! be loaded from a flat binary file (all integers little-endian):
//!
//! | offset | size            | content                         |
//! |--------|-----------------|---------------------------------|
//! | 0      | 4               | magic `EPDS`                    |
//! | 4      | 4               | version, `u32` = 1              |
//! | 8      | 4               | sample count `n`, `u32`         |
//! | 12     | 4               | feature dimension `d`, `u32`    |
//! | 16     | 4               | class count `c`, `u32`          |
//! | 20     | `n * (2 + d)`   | per sample: label `u16`, then `d` bytes |
//!
//! Feature bytes are scaled to `[0, 1]` by dividing by 255. Training and test
//! samples live in separate files.

use std::fs;
use std::path::Path;

use epd_core::data::{Blobs, BlobsConfig, LabeledSet};
use epd_core::nn::Matrix;

use crate::config::{DataSource, DatasetConfig};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EPDS";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

/// Parses a flat dataset from bytes.
pub fn decode_flat(bytes: &[u8]) -> Result<LabeledSet> {
    let bad = |msg: &str| Error::Dataset(msg.to_string());
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(bad("not a flat dataset (bad magic)"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    if word(4) != VERSION as usize {
        return Err(bad("unsupported flat dataset version"));
    }
    let (n, d, c) = (word(8), word(12), word(16));
    let stride = 2 + d;
    let body = &bytes[HEADER_LEN..];
    if d == 0 || body.len() != n * stride {
        return Err(bad("flat dataset size does not match its header"));
    }
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for rec in body.chunks_exact(stride) {
        labels.push(u16::from_le_bytes([rec[0], rec[1]]) as usize);
        features.extend(rec[2..].iter().map(|&b| b as f64 / 255.0));
    }
    Ok(LabeledSet::new(
        Matrix::from_vec(n, d, features)?,
        labels,
        c,
    )?)
}

/// Encodes `labels` and byte features (`n * dim`, row-major) as a flat file.
pub fn encode_flat(labels: &[u16], features: &[u8], dim: usize, classes: u32) -> Result<Vec<u8>> {
    if dim == 0 || features.len() != labels.len() * dim {
        return Err(Error::Dataset(
            "feature buffer does not match labels".into(),
        ));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + labels.len() * (2 + dim));
    out.extend_from_slice(MAGIC);
    for v in [VERSION, labels.len() as u32, dim as u32, classes] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for (l, row) in labels.iter().zip(features.chunks_exact(dim)) {
        out.extend_from_slice(&l.to_le_bytes());
        out.extend_from_slice(row);
    }
    Ok(out)
}

pub fn load_flat(path: &Path) -> Result<LabeledSet> {
    decode_flat(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

fn take(set: &LabeledSet, n: usize, what: &str) -> Result<LabeledSet> {
    if set.len() < n {
        return Err(Error::Dataset(format!(
            "{what} file has {} samples, {n} requested",
            set.len()
        )));
    }
    Ok(set.subset(&(0..n).collect::<Vec<_>>()))
}

/// Training pool (`T` samples) and test set (`V` samples).
pub fn load(cfg: &DatasetConfig) -> Result<(LabeledSet, LabeledSet)> {
    match cfg.source {
        DataSource::Blobs => {
            let blobs = Blobs::new(BlobsConfig {
                dim: cfg.dim,
                classes: cfg.c_classes,
                center_spread: cfg.center_spread,
                noise: cfg.noise,
                seed: cfg.data_seed,
            })?;
            Ok((blobs.sample(cfg.t_train, 0), blobs.sample(cfg.v_test, 1)))
        }
        DataSource::Flat => {
            let (Some(train), Some(test)) = (&cfg.train_path, &cfg.test_path) else {
                return Err(Error::Config(
                    "flat datasets need train_path and test_path".into(),
                ));
            };
            let train = load_flat(train)?;
            let test = load_flat(test)?;
            for set in [&train, &test] {
                if set.classes != cfg.c_classes {
                    return Err(Error::Dataset(format!(
                        "file declares {} classes, config says {}",
                        set.classes, cfg.c_classes
                    )));
                }
            }
            if train.dim() != test.dim() {
                return Err(Error::Dataset("train and test dimensions differ".into()));
            }
            Ok((
                take(&train, cfg.t_train, "train")?,
                take(&test, cfg.v_test, "test")?,
            ))
        }
    }
}
