use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use gec_core::corpus::Vocab;
use gec_core::datagen::{read_dataset, Dataset};

use crate::input_error;

/// Opens an input file, or stdin for "-". Failures are input errors.
pub fn open(path: &Path) -> Result<Box<dyn BufRead>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).map_err(|e| input_error!("cannot read {}: {e}", path.display()))?;
    Ok(Box::new(BufReader::new(f)))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Writes to `path`, or stdout when absent.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub fn load_vocab(path: &Path) -> Result<Vocab> {
    Vocab::read(open(path)?).map_err(|e| input_error!("vocabulary {}: {e}", path.display()))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    read_dataset(open(path)?).map_err(|e| input_error!("dataset {}: {e}", path.display()))
}
