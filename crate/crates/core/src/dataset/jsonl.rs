use serde::{Deserialize, Serialize};

use super::{EmbeddingFile, EmbeddingRecord};
use crate::embedding::{ModalityId, SpaceId};
use crate::error::{Error, Result};

#[derive(Serialize)]
struct LineOut<'a> {
    id: &'a str,
    modality: &'a str,
    space: &'a str,
    vector: &'a [f32],
}

#[derive(Deserialize)]
struct LineIn {
    id: String,
    modality: String,
    space: String,
    vector: Vec<f64>,
}

/// One `{"id", "modality", "space", "vector"}` object per line.
pub fn encode_jsonl(file: &EmbeddingFile) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for r in file.records() {
        serde_json::to_writer(
            &mut out,
            &LineOut {
                id: &r.id,
                modality: file.modality().as_str(),
                space: file.space().as_str(),
                vector: &r.values,
            },
        )?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Parses JSON lines. The first record fixes modality, space and dimension.
pub fn decode_jsonl(bytes: &[u8]) -> Result<EmbeddingFile> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    let mut header: Option<(ModalityId, SpaceId, usize)> = None;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: LineIn = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let values: Vec<f32> = parsed.vector.iter().map(|&v| v as f32).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(format!("line {line_no}")));
        }
        match &header {
            None => {
                header = Some((
                    ModalityId::new(parsed.modality)?,
                    SpaceId::new(parsed.space)?,
                    values.len(),
                ));
            }
            Some((modality, space, dim)) => {
                if parsed.modality != modality.as_str() || parsed.space != space.as_str() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!(
                            "record is {}/{}, file is {modality}/{space}",
                            parsed.modality, parsed.space
                        ),
                    });
                }
                if values.len() != *dim {
                    return Err(Error::DimensionMismatch {
                        left: *dim,
                        right: values.len(),
                    });
                }
            }
        }
        records.push(EmbeddingRecord {
            id: parsed.id,
            values,
        });
    }
    let (modality, space, dim) = header.ok_or(Error::EmptyInput("jsonl file has no records"))?;
    EmbeddingFile::new(modality, space, dim, records)
}
