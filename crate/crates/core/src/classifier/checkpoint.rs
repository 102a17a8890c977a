//! Model checkpoints.
//!
//! ```text
//! "GECM" u16 version
//! sections: u32 name length, name (UTF-8), u64 payload length, payload
//!   "config"      ModelConfig as JSON
//!   "vocab"       u64 fingerprint, u64 vocabulary size
//!   "param:NAME"  u32 rows, u32 cols, rows × cols f64
//! ```
//! Integers and floats are little-endian.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::config::{ConfigError, ModelConfig};
use super::model::Model;
use crate::neural::Matrix;

const MAGIC: &[u8; 4] = b"GECM";
pub const CHECKPOINT_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("not a model checkpoint (bad magic bytes)")]
    BadMagic,
    #[error("unsupported checkpoint version {0} (expected {CHECKPOINT_VERSION})")]
    Version(u16),
    #[error("checkpoint truncated in section {0:?}")]
    Truncated(String),
    #[error("checkpoint is missing section {0:?}")]
    MissingSection(String),
    #[error("malformed section {section:?}: {message}")]
    Malformed { section: String, message: String },
    #[error("parameter {name}: expected shape {expected:?}, found {found:?}")]
    Shape {
        name: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("invalid model config: {0}")]
    Config(#[from] ConfigError),
    #[error(
        "vocabulary fingerprint mismatch: checkpoint {checkpoint:016x}, vocabulary {vocab:016x}"
    )]
    VocabMismatch { checkpoint: u64, vocab: u64 },
}

fn write_section<W: Write>(out: &mut W, name: &str, payload: &[u8]) -> io::Result<()> {
    out.write_all(&(name.len() as u32).to_le_bytes())?;
    out.write_all(name.as_bytes())?;
    out.write_all(&(payload.len() as u64).to_le_bytes())?;
    out.write_all(payload)
}

fn matrix_payload(m: &Matrix) -> Vec<u8> {
    let mut p = Vec::with_capacity(8 + 8 * m.as_slice().len());
    p.extend_from_slice(&(m.rows() as u32).to_le_bytes());
    p.extend_from_slice(&(m.cols() as u32).to_le_bytes());
    for v in m.as_slice() {
        p.extend_from_slice(&v.to_le_bytes());
    }
    p
}

pub fn write_model<W: Write>(mut out: W, model: &Model) -> io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    let config = serde_json::to_vec(&model.config).map_err(io::Error::other)?;
    write_section(&mut out, "config", &config)?;
    let mut vocab = Vec::with_capacity(16);
    vocab.extend_from_slice(&model.vocab_fingerprint.to_le_bytes());
    vocab.extend_from_slice(&(model.vocab_size() as u64).to_le_bytes());
    write_section(&mut out, "vocab", &vocab)?;
    for (name, m) in model.named_tensors() {
        write_section(&mut out, &format!("param:{name}"), &matrix_payload(m))?;
    }
    out.flush()
}

pub fn save_model(model: &Model, path: &Path) -> io::Result<()> {
    write_model(BufWriter::new(File::create(path)?), model)
}

fn read_sections<R: Read>(mut input: R) -> Result<Vec<(String, Vec<u8>)>, CheckpointError> {
    let mut magic = [0u8; 4];
    if input.read_exact(&mut magic).is_err() || &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let mut version = [0u8; 2];
    input
        .read_exact(&mut version)
        .map_err(|_| CheckpointError::Truncated("header".into()))?;
    let version = u16::from_le_bytes(version);
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::Version(version));
    }
    let mut sections = Vec::new();
    let mut last = "header".to_string();
    loop {
        let mut len = [0u8; 4];
        match input.read_exact(&mut len) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let truncated = |name: &str| CheckpointError::Truncated(name.to_string());
        let mut name = vec![0u8; u32::from_le_bytes(len) as usize];
        input
            .read_exact(&mut name)
            .map_err(|_| truncated(&format!("after {last}")))?;
        let name = String::from_utf8(name).map_err(|_| CheckpointError::Malformed {
            section: format!("after {last}"),
            message: "section name is not UTF-8".into(),
        })?;
        let mut plen = [0u8; 8];
        input.read_exact(&mut plen).map_err(|_| truncated(&name))?;
        let plen = u64::from_le_bytes(plen);
        let mut payload = Vec::new();
        let got = input.by_ref().take(plen).read_to_end(&mut payload)?;
        if got as u64 != plen {
            return Err(truncated(&name));
        }
        last = name.clone();
        sections.push((name, payload));
    }
    Ok(sections)
}

fn parse_matrix(name: &str, payload: &[u8]) -> Result<Matrix, CheckpointError> {
    let malformed = |message: &str| CheckpointError::Malformed {
        section: format!("param:{name}"),
        message: message.to_string(),
    };
    if payload.len() < 8 {
        return Err(malformed("missing shape header"));
    }
    let rows = u32::from_le_bytes(payload[0..4].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(payload[4..8].try_into().unwrap()) as usize;
    let body = &payload[8..];
    if body.len() != rows * cols * 8 {
        return Err(malformed(&format!(
            "{} value bytes for shape {rows}x{cols}",
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Matrix::from_vec(rows, cols, data))
}

/// Reads a checkpoint. With `expected_fingerprint` set, a mismatch is an
/// error when `strict`, otherwise a logged warning.
pub fn read_model<R: Read>(
    input: R,
    expected_fingerprint: Option<u64>,
    strict: bool,
) -> Result<Model, CheckpointError> {
    let sections: HashMap<String, Vec<u8>> = read_sections(input)?.into_iter().collect();
    let get = |name: &str| {
        sections
            .get(name)
            .ok_or_else(|| CheckpointError::MissingSection(name.to_string()))
    };
    let config: ModelConfig =
        serde_json::from_slice(get("config")?).map_err(|e| CheckpointError::Malformed {
            section: "config".into(),
            message: e.to_string(),
        })?;
    let vocab = get("vocab")?;
    if vocab.len() != 16 {
        return Err(CheckpointError::Malformed {
            section: "vocab".into(),
            message: format!("{} bytes, expected 16", vocab.len()),
        });
    }
    let fingerprint = u64::from_le_bytes(vocab[0..8].try_into().unwrap());
    let vocab_size = u64::from_le_bytes(vocab[8..16].try_into().unwrap()) as usize;
    if let Some(expected) = expected_fingerprint {
        if expected != fingerprint {
            if strict {
                return Err(CheckpointError::VocabMismatch {
                    checkpoint: fingerprint,
                    vocab: expected,
                });
            }
            log::warn!("vocabulary fingerprint mismatch: checkpoint {fingerprint:016x}, vocabulary {expected:016x}");
        }
    }
    // a freshly built model fixes the expected shapes
    let mut model = Model::new(config, vocab_size, fingerprint)?;
    let names: Vec<String> = model.named_tensors().into_iter().map(|(n, _)| n).collect();
    for (name, slot) in names.iter().zip(model.tensors_mut()) {
        let m = parse_matrix(name, get(&format!("param:{name}"))?)?;
        if m.shape() != slot.shape() {
            return Err(CheckpointError::Shape {
                name: name.clone(),
                expected: slot.shape(),
                found: m.shape(),
            });
        }
        *slot = m;
    }
    Ok(model)
}

pub fn load_model(
    path: &Path,
    expected_fingerprint: Option<u64>,
    strict: bool,
) -> Result<Model, CheckpointError> {
    read_model(
        BufReader::new(File::open(path)?),
        expected_fingerprint,
        strict,
    )
}
