use std::io::BufRead;

use thiserror::Error;

use crate::corpus::Vocab;
use crate::neural::Matrix;

#[derive(Debug, Error)]
pub enum PretrainedError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Copies vectors from a `word v1 v2 ... vd` text file into the rows of
/// `embeddings` for in-vocabulary words. Returns how many rows were set.
pub fn load_pretrained<R: BufRead>(
    input: R,
    vocab: &Vocab,
    embeddings: &mut Matrix,
) -> Result<usize, PretrainedError> {
    let dim = embeddings.cols();
    let mut set = 0;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        if !vocab.contains(word) {
            continue;
        }
        let values: Vec<f64> = parts
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| PretrainedError::Format {
                line: i + 1,
                message: format!("bad number: {e}"),
            })?;
        if values.len() != dim {
            return Err(PretrainedError::Format {
                line: i + 1,
                message: format!("{} values, expected {dim}", values.len()),
            });
        }
        embeddings
            .row_mut(vocab.id(word) as usize)
            .copy_from_slice(&values);
        set += 1;
    }
    Ok(set)
}
