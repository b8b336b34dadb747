//! Embedding files, joining them into per-sample records, building
//! mispaired negatives, and writing score tables.

mod emb1;
mod join;
mod jsonl;
mod mispair;
mod scores;

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

pub use emb1::{decode_emb1, encode_emb1, EMB1_MAGIC, EMB1_VERSION};
pub use join::{join_samples, IncompleteSample, JoinedSamples};
pub use jsonl::{decode_jsonl, encode_jsonl};
pub use mispair::{mispair, random_derangement, PairingPlan, MAX_DERANGEMENT_ATTEMPTS};
pub use scores::{
    read_scores, read_scores_from, write_score_rows, write_scores, ScoreFormat, ScoreRow,
    SCORE_COLUMNS,
};

use crate::embedding::{Embedding, ModalityId, SpaceId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub id: String,
    pub values: Vec<f32>,
}

/// All embeddings of one modality from one space, keyed by sample id.
///
/// `dim` may be 0 only when the file holds no records.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    path: Option<PathBuf>,
    modality: ModalityId,
    space: SpaceId,
    dim: usize,
    records: Vec<EmbeddingRecord>,
}

impl EmbeddingFile {
    pub fn new(
        modality: ModalityId,
        space: SpaceId,
        dim: usize,
        records: Vec<EmbeddingRecord>,
    ) -> Result<Self> {
        if dim == 0 && !records.is_empty() {
            return Err(Error::InvalidHeader("dim must be at least 1".into()));
        }
        let mut seen = HashSet::with_capacity(records.len());
        for record in &records {
            if !seen.insert(record.id.as_str()) {
                return Err(Error::DuplicateId(record.id.clone()));
            }
            if record.values.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: record.values.len(),
                });
            }
            if record.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue(format!("record {:?}", record.id)));
            }
        }
        Ok(Self {
            path: None,
            modality,
            space,
            dim,
            records,
        })
    }

    pub fn with_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.path = Some(path.into());
        self
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn modality(&self) -> &ModalityId {
        &self.modality
    }

    pub fn space(&self) -> &SpaceId {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.records.len()
    }

    pub fn records(&self) -> &[EmbeddingRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<EmbeddingRecord> {
        self.records
    }

    pub fn embedding(&self, index: usize) -> Option<Embedding> {
        self.records.get(index).map(|r| {
            Embedding::new(r.values.clone(), self.modality.clone(), self.space.clone())
                .expect("records are validated on construction")
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Emb1,
    Jsonl,
}

impl EmbeddingFormat {
    /// `.jsonl`/`.json` map to JSON lines; everything else is emb1.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "json") => Self::Jsonl,
            _ => Self::Emb1,
        }
    }
}

impl std::str::FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "emb1" => Ok(Self::Emb1),
            "jsonl" => Ok(Self::Jsonl),
            other => Err(Error::InvalidConfig(format!(
                "unknown embedding format {other:?}"
            ))),
        }
    }
}

pub fn read_embeddings(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<EmbeddingFile> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let file = match format {
        EmbeddingFormat::Emb1 => decode_emb1(&bytes)?,
        EmbeddingFormat::Jsonl => decode_jsonl(&bytes)?,
    };
    Ok(file.with_path(path))
}

pub fn write_embeddings(
    file: &EmbeddingFile,
    path: impl AsRef<Path>,
    format: EmbeddingFormat,
) -> Result<()> {
    let bytes = match format {
        EmbeddingFormat::Emb1 => encode_emb1(file)?,
        EmbeddingFormat::Jsonl => encode_jsonl(file)?,
    };
    fs::write(path, bytes)?;
    Ok(())
}
