//! Binary dataset files.
//!
//! ```text
//! "GECD" u16 version
//! u8 error type, u8 provenance, u64 vocab fingerprint
//! u32 class count, u64 × class count examples per class, u64 record count
//! records: u32 n, n × u32 left ids, u32 m, m × u32 right ids, u32 base id, u32 label
//! ```
//! All integers little-endian.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::TrainingExample;
use crate::linguistics::ErrorType;

const MAGIC: &[u8; 4] = b"GECD";
pub const DATASET_VERSION: u16 = 1;

/// Where the tags used for site detection came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    BuiltinTagger,
    ExternalTags,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetHeader {
    pub error_type: ErrorType,
    pub provenance: Provenance,
    pub vocab_fingerprint: u64,
    pub class_counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub examples: Vec<TrainingExample>,
}

impl Dataset {
    /// Wraps examples, computing the per-class counts.
    pub fn new(
        error_type: ErrorType,
        provenance: Provenance,
        vocab_fingerprint: u64,
        examples: Vec<TrainingExample>,
    ) -> Self {
        let mut class_counts = vec![0; error_type.class_count()];
        for e in &examples {
            class_counts[e.label] += 1;
        }
        Dataset {
            header: DatasetHeader {
                error_type,
                provenance,
                vocab_fingerprint,
                class_counts,
            },
            examples,
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("not a dataset file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported dataset version {0} (expected {DATASET_VERSION})")]
    Version(u16),
    #[error("truncated dataset header")]
    TruncatedHeader,
    #[error("truncated dataset at record {index}")]
    TruncatedRecord { index: u64 },
    #[error("invalid dataset header: {0}")]
    InvalidHeader(String),
    #[error("invalid record {index}: {message}")]
    InvalidRecord { index: u64, message: String },
}

fn put_ids<W: Write>(out: &mut W, ids: &[u32]) -> io::Result<()> {
    out.write_all(&(ids.len() as u32).to_le_bytes())?;
    for id in ids {
        out.write_all(&id.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_dataset<W: Write>(mut out: W, dataset: &Dataset) -> io::Result<()> {
    let h = &dataset.header;
    out.write_all(MAGIC)?;
    out.write_all(&DATASET_VERSION.to_le_bytes())?;
    out.write_all(&[h.error_type.code(), h.provenance as u8])?;
    out.write_all(&h.vocab_fingerprint.to_le_bytes())?;
    out.write_all(&(h.class_counts.len() as u32).to_le_bytes())?;
    for c in &h.class_counts {
        out.write_all(&c.to_le_bytes())?;
    }
    out.write_all(&(dataset.examples.len() as u64).to_le_bytes())?;
    for e in &dataset.examples {
        put_ids(&mut out, &e.left_ids)?;
        put_ids(&mut out, &e.right_ids)?;
        out.write_all(&e.target_base_id.to_le_bytes())?;
        out.write_all(&(e.label as u32).to_le_bytes())?;
    }
    out.flush()
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    /// `Ok(None)` on a clean or partial end of input.
    fn bytes<const N: usize>(&mut self) -> io::Result<Option<[u8; N]>> {
        let mut buf = [0u8; N];
        match self.inner.read_exact(&mut buf) {
            Ok(()) => Ok(Some(buf)),
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn u32(&mut self) -> io::Result<Option<u32>> {
        Ok(self.bytes::<4>()?.map(u32::from_le_bytes))
    }

    fn u64(&mut self) -> io::Result<Option<u64>> {
        Ok(self.bytes::<8>()?.map(u64::from_le_bytes))
    }

    fn ids(&mut self) -> io::Result<Option<Vec<u32>>> {
        let Some(n) = self.u32()? else {
            return Ok(None);
        };
        let mut ids = Vec::with_capacity((n as usize).min(1 << 16));
        for _ in 0..n {
            match self.u32()? {
                Some(id) => ids.push(id),
                None => return Ok(None),
            }
        }
        Ok(Some(ids))
    }
}

pub fn read_dataset<R: Read>(input: R) -> Result<Dataset, DatasetError> {
    let mut r = Reader { inner: input };
    let magic = r.bytes::<4>()?.ok_or(DatasetError::BadMagic)?;
    if &magic != MAGIC {
        return Err(DatasetError::BadMagic);
    }
    let version = r
        .bytes::<2>()?
        .map(u16::from_le_bytes)
        .ok_or(DatasetError::TruncatedHeader)?;
    if version != DATASET_VERSION {
        return Err(DatasetError::Version(version));
    }
    let [type_code, prov] = r.bytes::<2>()?.ok_or(DatasetError::TruncatedHeader)?;
    let error_type = ErrorType::from_code(type_code)
        .ok_or_else(|| DatasetError::InvalidHeader(format!("error type code {type_code}")))?;
    let provenance = match prov {
        0 => Provenance::BuiltinTagger,
        1 => Provenance::ExternalTags,
        p => return Err(DatasetError::InvalidHeader(format!("provenance code {p}"))),
    };
    let vocab_fingerprint = r.u64()?.ok_or(DatasetError::TruncatedHeader)?;
    let n_classes = r.u32()?.ok_or(DatasetError::TruncatedHeader)? as usize;
    if n_classes != error_type.class_count() {
        return Err(DatasetError::InvalidHeader(format!(
            "{n_classes} classes for {error_type}, expected {}",
            error_type.class_count()
        )));
    }
    let mut class_counts = Vec::with_capacity(n_classes);
    for _ in 0..n_classes {
        class_counts.push(r.u64()?.ok_or(DatasetError::TruncatedHeader)?);
    }
    let count = r.u64()?.ok_or(DatasetError::TruncatedHeader)?;
    let mut examples = Vec::with_capacity((count as usize).min(1 << 20));
    let mut seen = vec![0u64; n_classes];
    for index in 0..count {
        let truncated = || DatasetError::TruncatedRecord { index };
        let left_ids = r.ids()?.ok_or_else(truncated)?;
        let right_ids = r.ids()?.ok_or_else(truncated)?;
        let target_base_id = r.u32()?.ok_or_else(truncated)?;
        let label = r.u32()?.ok_or_else(truncated)? as usize;
        if label >= n_classes {
            return Err(DatasetError::InvalidRecord {
                index,
                message: format!("label {label} out of range"),
            });
        }
        if left_ids.is_empty() || right_ids.is_empty() {
            return Err(DatasetError::InvalidRecord {
                index,
                message: "empty context".into(),
            });
        }
        seen[label] += 1;
        examples.push(TrainingExample {
            error_type,
            left_ids,
            right_ids,
            target_base_id,
            label,
        });
    }
    if seen != class_counts {
        return Err(DatasetError::InvalidHeader(format!(
            "class counts {class_counts:?} disagree with records {seen:?}"
        )));
    }
    Ok(Dataset {
        header: DatasetHeader {
            error_type,
            provenance,
            vocab_fingerprint,
            class_counts,
        },
        examples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = ErrorType::Preposition;
        let examples = (0..n)
            .map(|_| {
                let l = rng.gen_range(1..10);
                let r = rng.gen_range(1..10);
                TrainingExample {
                    error_type: t,
                    left_ids: (0..l).map(|_| rng.gen()).collect(),
                    right_ids: (0..r).map(|_| rng.gen()).collect(),
                    target_base_id: rng.gen(),
                    label: rng.gen_range(0..t.class_count()),
                }
            })
            .collect();
        Dataset::new(t, Provenance::ExternalTags, rng.gen(), examples)
    }

    fn roundtrip(d: &Dataset) -> Vec<u8> {
        let mut buf = Vec::new();
        write_dataset(&mut buf, d).unwrap();
        buf
    }

    #[test]
    fn thousand_examples_roundtrip() {
        let d = random_dataset(1000, 1);
        let buf = roundtrip(&d);
        assert_eq!(read_dataset(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn empty_dataset_roundtrip() {
        let d = Dataset::new(ErrorType::Article, Provenance::BuiltinTagger, 42, vec![]);
        let buf = roundtrip(&d);
        assert!(buf.starts_with(b"GECD"));
        let back = read_dataset(buf.as_slice()).unwrap();
        assert!(back.examples.is_empty());
        assert_eq!(back.header.class_counts, vec![0, 0, 0]);
    }

    #[test]
    fn wrong_magic_and_version() {
        let mut buf = roundtrip(&random_dataset(3, 2));
        buf[0] = b'X';
        assert!(matches!(
            read_dataset(buf.as_slice()),
            Err(DatasetError::BadMagic)
        ));
        let mut buf = roundtrip(&random_dataset(3, 2));
        buf[4] = 9;
        assert!(matches!(
            read_dataset(buf.as_slice()),
            Err(DatasetError::Version(9))
        ));
    }

    #[test]
    fn truncation_names_record() {
        let d = random_dataset(5, 3);
        let full = roundtrip(&d);
        let buf = &full[..full.len() - 2];
        match read_dataset(buf) {
            Err(DatasetError::TruncatedRecord { index }) => assert_eq!(index, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            read_dataset(&full[..10]),
            Err(DatasetError::TruncatedHeader)
        ));
    }
}
