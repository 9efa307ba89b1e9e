//! Run-directory files. CSV files carry a header row and leave absent
//! values empty; floats use the shortest representation that parses back
//! to the same `f64`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::archive::ArchiveEntry;
use super::run::GenerationRecord;
use super::{SearchConfig, SearchError};
use crate::gates::ArchEmbedding;
use crate::surrogate::TrainingSet;

/// Paths of the files in one run directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunFiles {
    pub root: PathBuf,
}

impl RunFiles {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunFiles { root: root.into() }
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.json")
    }

    pub fn surrogate_data(&self) -> PathBuf {
        self.root.join("surrogate_data.csv")
    }

    pub fn history(&self) -> PathBuf {
        self.root.join("history.jsonl")
    }

    pub fn archive(&self) -> PathBuf {
        self.root.join("archive.csv")
    }

    pub fn screened(&self) -> PathBuf {
        self.root.join("screened.csv")
    }
}

/// First 16 hex digits of the SHA-256 of the embedding's little-endian bytes.
pub fn embedding_hash(e: &ArchEmbedding) -> String {
    let mut h = Sha256::new();
    for v in e.as_slice() {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn write_config(path: &Path, cfg: &SearchConfig) -> Result<(), SearchError> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, cfg)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SurrogateRow<'a> {
    genome: String,
    embedding_hash: &'a str,
    f1h: f64,
    f2h: f64,
    label: f64,
}

pub fn write_surrogate_data(path: &Path, set: &TrainingSet) -> Result<(), SearchError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in set.records() {
        let hash = embedding_hash(&r.embedding);
        w.serialize(SurrogateRow { genome: r.genome.to_string(), embedding_hash: &hash, f1h: r.f1h, f2h: r.f2h, label: r.label })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_history(path: &Path, history: &[GenerationRecord]) -> Result<(), SearchError> {
    let mut out = BufWriter::new(File::create(path)?);
    for rec in history {
        serde_json::to_writer(&mut out, rec)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_history(path: &Path) -> Result<Vec<GenerationRecord>, SearchError> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct ArchiveRow {
    genome: String,
    f1l: Option<f64>,
    f2l: Option<f64>,
    f3: Option<f64>,
    f1h: Option<f64>,
    f2h: Option<f64>,
    generation: usize,
}

fn both(a: Option<f64>, b: Option<f64>, what: &str) -> Result<Option<(f64, f64)>, SearchError> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        (None, None) => Ok(None),
        _ => Err(SearchError::Format(format!("{what} columns must be both present or both empty"))),
    }
}

pub fn write_archive(path: &Path, entries: &[ArchiveEntry]) -> Result<(), SearchError> {
    let mut w = csv::Writer::from_path(path)?;
    for e in entries {
        w.serialize(ArchiveRow {
            genome: e.genome.to_string(),
            f1l: e.low.map(|p| p.0),
            f2l: e.low.map(|p| p.1),
            f3: e.f3,
            f1h: e.high.map(|p| p.0),
            f2h: e.high.map(|p| p.1),
            generation: e.generation,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `archive.csv` or `screened.csv`. Insertion objectives are not
/// stored, so `objectives` comes back empty.
pub fn read_archive(path: &Path) -> Result<Vec<ArchiveEntry>, SearchError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: ArchiveRow = row?;
        let genome = row.genome.parse().map_err(|e| SearchError::Format(format!("genome {:?}: {e}", row.genome)))?;
        out.push(ArchiveEntry {
            genome,
            objectives: Vec::new(),
            low: both(row.f1l, row.f2l, "f1l/f2l")?,
            f3: row.f3,
            high: both(row.f1h, row.f2h, "f1h/f2h")?,
            generation: row.generation,
        });
    }
    Ok(out)
}
