use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::EmbeddingFile;
use crate::embedding::{ConsistencyLabel, ModalityId, SampleRecord};
use crate::error::{Error, Result};

/// A sample id present in some inputs but not all.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IncompleteSample {
    pub id: String,
    pub missing: Vec<ModalityId>,
}

#[derive(Debug, Clone, Default)]
pub struct JoinedSamples {
    /// Complete samples, sorted by id.
    pub samples: Vec<SampleRecord>,
    /// Ids missing at least one modality, sorted by id.
    pub incomplete: Vec<IncompleteSample>,
}

/// Inner join of per-modality files on sample id.
///
/// Ids missing from some inputs are returned in `incomplete` instead of being
/// dropped silently. Joined samples carry [`ConsistencyLabel::Unknown`].
pub fn join_samples(files: &[EmbeddingFile]) -> Result<JoinedSamples> {
    if files.len() < 2 {
        return Err(Error::TooFewInputs {
            needed: 2,
            got: files.len(),
        });
    }
    let mut modalities = HashSet::new();
    for f in files {
        if !modalities.insert(f.modality()) {
            return Err(Error::DuplicateModality(f.modality().clone()));
        }
    }

    // id -> record index in each file
    let mut index: BTreeMap<&str, Vec<Option<usize>>> = BTreeMap::new();
    for (fi, file) in files.iter().enumerate() {
        for (ri, record) in file.records().iter().enumerate() {
            index
                .entry(record.id.as_str())
                .or_insert_with(|| vec![None; files.len()])[fi] = Some(ri);
        }
    }

    let mut joined = JoinedSamples::default();
    for (id, slots) in index {
        if slots.iter().all(Option::is_some) {
            let embeddings = slots.iter().zip(files).map(|(slot, file)| {
                file.embedding(slot.expect("checked"))
                    .expect("index in range")
            });
            joined.samples.push(SampleRecord::new(
                id,
                embeddings,
                ConsistencyLabel::Unknown,
            )?);
        } else {
            let missing = slots
                .iter()
                .zip(files)
                .filter(|(slot, _)| slot.is_none())
                .map(|(_, f)| f.modality().clone())
                .collect();
            joined.incomplete.push(IncompleteSample {
                id: id.to_owned(),
                missing,
            });
        }
    }
    Ok(joined)
}
