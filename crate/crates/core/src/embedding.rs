//! Embedding vectors, identifiers for modalities and latent spaces, and the
//! vector primitives every score is built from.
//!
//! Storage is `f32`; every reduction accumulates in `f64` in a fixed
//! left-to-right order, so results are identical regardless of how callers
//! parallelize over samples.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norms below this (computed in `f64`) are treated as the zero vector.
pub const ZERO_NORM_THRESHOLD: f64 = 1e-12;

/// Name of a data modality such as `vision`, `text` or `audio`.
///
/// Open-ended: any non-empty lowercase identifier without whitespace is
/// accepted so further modalities can be added without code changes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModalityId(String);

impl ModalityId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        let valid = !name.is_empty()
            && !name.chars().any(char::is_whitespace)
            && !name.chars().any(char::is_uppercase);
        if valid {
            Ok(Self(name))
        } else {
            Err(Error::InvalidModality(name))
        }
    }

    pub fn vision() -> Self {
        Self("vision".to_owned())
    }

    pub fn text() -> Self {
        Self("text".to_owned())
    }

    pub fn audio() -> Self {
        Self("audio".to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ModalityId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ModalityId> for String {
    fn from(value: ModalityId) -> Self {
        value.0
    }
}

impl FromStr for ModalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s)
    }
}

impl fmt::Display for ModalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Identifier of the latent space that produced an embedding
/// (`cmcr`, `clip`, `clap`, `synth-unified`, ...).
///
/// Two embeddings are only comparable on one scale when their spaces match.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SpaceId(String);

impl SpaceId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            Err(Error::InvalidSpace(name))
        } else {
            Ok(Self(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for SpaceId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Self::new(value)
    }
}

impl From<SpaceId> for String {
    fn from(value: SpaceId) -> Self {
        value.0
    }
}

impl FromStr for SpaceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s)
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A finite, non-empty embedding vector tagged with its modality and space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    values: Vec<f32>,
    modality: ModalityId,
    space: SpaceId,
}

impl Embedding {
    pub fn new(values: Vec<f32>, modality: ModalityId, space: SpaceId) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidEmbedding(
                "dimension must be at least 1".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(format!("embedding component {i}")));
        }
        Ok(Self {
            values,
            modality,
            space,
        })
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn modality(&self) -> &ModalityId {
        &self.modality
    }

    pub fn space(&self) -> &SpaceId {
        &self.space
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }
}

/// Whether a sample's modalities describe the same content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConsistencyLabel {
    Consistent,
    Mispaired,
    #[default]
    Unknown,
}

impl ConsistencyLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Consistent => "consistent",
            Self::Mispaired => "mispaired",
            Self::Unknown => "unknown",
        }
    }
}

impl fmt::Display for ConsistencyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConsistencyLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consistent" => Ok(Self::Consistent),
            "mispaired" => Ok(Self::Mispaired),
            "unknown" => Ok(Self::Unknown),
            other => Err(Error::Parse {
                line: 0,
                message: format!("unknown consistency label {other:?}"),
            }),
        }
    }
}

/// One dataset item: embeddings for at least two modalities, joined by id.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    id: String,
    embeddings: BTreeMap<ModalityId, Embedding>,
    label: ConsistencyLabel,
}

impl SampleRecord {
    pub fn new(
        id: impl Into<String>,
        embeddings: impl IntoIterator<Item = Embedding>,
        label: ConsistencyLabel,
    ) -> Result<Self> {
        let id = id.into();
        let mut map = BTreeMap::new();
        for emb in embeddings {
            let modality = emb.modality().clone();
            if map.insert(modality.clone(), emb).is_some() {
                return Err(Error::InvalidSample {
                    id,
                    reason: format!("modality {modality} given twice"),
                });
            }
        }
        if map.len() < 2 {
            return Err(Error::InvalidSample {
                id,
                reason: format!("needs at least 2 modalities, has {}", map.len()),
            });
        }
        Ok(Self {
            id,
            embeddings: map,
            label,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> ConsistencyLabel {
        self.label
    }

    pub fn with_label(mut self, label: ConsistencyLabel) -> Self {
        self.label = label;
        self
    }

    pub fn get(&self, modality: &ModalityId) -> Option<&Embedding> {
        self.embeddings.get(modality)
    }

    pub fn modalities(&self) -> impl Iterator<Item = &ModalityId> {
        self.embeddings.keys()
    }

    pub fn embeddings(&self) -> impl Iterator<Item = &Embedding> {
        self.embeddings.values()
    }

    /// Swaps in a different embedding for an existing modality, returning the old one.
    pub(crate) fn replace(&mut self, embedding: Embedding) -> Option<Embedding> {
        self.embeddings
            .insert(embedding.modality().clone(), embedding)
    }
}

pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |acc, (&x, &y)| acc + f64::from(x) * f64::from(y))
}

pub(crate) fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity of two raw vectors, clamped to `[-1, 1]`.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let na = norm(a);
    let nb = norm(b);
    if na < ZERO_NORM_THRESHOLD || nb < ZERO_NORM_THRESHOLD {
        return Err(Error::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Cosine similarity between two embeddings.
///
/// Spaces are not checked here; callers that require a shared space
/// (joint-representation scoring) enforce it one level up.
pub fn cosine_similarity(a: &Embedding, b: &Embedding) -> Result<f64> {
    cosine(a.values(), b.values())
}

fn scale_to_unit(values: &[f64]) -> Result<Vec<f32>> {
    let n = values.iter().fold(0.0f64, |acc, v| acc + v * v).sqrt();
    if n < ZERO_NORM_THRESHOLD {
        return Err(Error::ZeroVector);
    }
    Ok(values.iter().map(|v| (v / n) as f32).collect())
}

pub fn normalize(a: &Embedding) -> Result<Embedding> {
    let wide: Vec<f64> = a.values().iter().copied().map(f64::from).collect();
    let values = scale_to_unit(&wide)?;
    Ok(Embedding {
        values,
        modality: a.modality.clone(),
        space: a.space.clone(),
    })
}

/// How per-frame embeddings are combined into one clip embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// Arithmetic mean, then rescaled to unit length.
    #[default]
    MeanRenormalized,
    /// Arithmetic mean only.
    Mean,
}

/// Averages a sequence of frame embeddings (e.g. one per second of video).
pub fn mean_pool_frames(frames: &[Embedding], pooling: Pooling) -> Result<Embedding> {
    let first = frames.first().ok_or(Error::EmptySequence)?;
    let dim = first.dim();
    let mut sum = vec![0.0f64; dim];
    for frame in frames {
        if frame.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: frame.dim(),
            });
        }
        if frame.modality != first.modality {
            return Err(Error::InvalidEmbedding(format!(
                "frame modality {} differs from {}",
                frame.modality, first.modality
            )));
        }
        if frame.space != first.space {
            return Err(Error::SpaceMismatch {
                pair: format!("frames of {}", first.modality),
                left: first.space.clone(),
                right: frame.space.clone(),
            });
        }
        for (acc, &v) in sum.iter_mut().zip(&frame.values) {
            *acc += f64::from(v);
        }
    }
    let count = frames.len() as f64;
    let mean: Vec<f64> = sum.into_iter().map(|s| s / count).collect();
    let values = match pooling {
        Pooling::MeanRenormalized => scale_to_unit(&mean)?,
        Pooling::Mean => {
            if mean.iter().fold(0.0f64, |acc, v| acc + v * v).sqrt() < ZERO_NORM_THRESHOLD {
                return Err(Error::ZeroVector);
            }
            mean.into_iter().map(|v| v as f32).collect()
        }
    };
    Ok(Embedding {
        values,
        modality: first.modality.clone(),
        space: first.space.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(values: &[f32]) -> Embedding {
        Embedding::new(
            values.to_vec(),
            ModalityId::vision(),
            SpaceId::new("test").unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(
            cosine_similarity(&emb(&[1.0, 0.0]), &emb(&[1.0, 0.0])).unwrap(),
            1.0
        );
        assert_eq!(
            cosine_similarity(&emb(&[1.0, 0.0]), &emb(&[0.0, 1.0])).unwrap(),
            0.0
        );
        let c = cosine_similarity(&emb(&[1.0, 1.0]), &emb(&[1.0, 0.0])).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn cosine_errors() {
        assert!(matches!(
            cosine_similarity(&emb(&[1.0, 0.0]), &emb(&[1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
        assert!(matches!(
            cosine_similarity(&emb(&[0.0, 0.0]), &emb(&[1.0, 0.0])),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn cosine_is_clamped() {
        // Parallel vectors whose f64 cosine can round above 1.
        let a = [0.1f32, 0.2, 0.3, 0.7, 1e-3];
        let c = cosine(&a, &a).unwrap();
        assert!(c <= 1.0);
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_examples() {
        let n = normalize(&emb(&[3.0, 4.0])).unwrap();
        assert_eq!(n.values(), &[0.6, 0.8]);
        assert_eq!(normalize(&emb(&[1.0, 0.0])).unwrap().values(), &[1.0, 0.0]);
        assert!(matches!(
            normalize(&emb(&[0.0, 0.0])),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn pooling_examples() {
        let p =
            mean_pool_frames(&[emb(&[1.0, 0.0]), emb(&[1.0, 0.0])], Pooling::default()).unwrap();
        assert_eq!(p.values(), &[1.0, 0.0]);

        let p =
            mean_pool_frames(&[emb(&[1.0, 0.0]), emb(&[0.0, 1.0])], Pooling::default()).unwrap();
        for v in p.values() {
            assert!((f64::from(*v) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7);
        }

        let p = mean_pool_frames(&[emb(&[1.0, 0.0]), emb(&[0.0, 1.0])], Pooling::Mean).unwrap();
        assert_eq!(p.values(), &[0.5, 0.5]);

        assert!(matches!(
            mean_pool_frames(&[emb(&[1.0, 0.0]), emb(&[-1.0, 0.0])], Pooling::default()),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            mean_pool_frames(&[], Pooling::default()),
            Err(Error::EmptySequence)
        ));
        assert!(matches!(
            mean_pool_frames(&[emb(&[1.0, 0.0]), emb(&[1.0])], Pooling::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pooling_rejects_mixed_spaces() {
        let other = Embedding::new(
            vec![1.0, 0.0],
            ModalityId::vision(),
            SpaceId::new("x").unwrap(),
        )
        .unwrap();
        assert!(matches!(
            mean_pool_frames(&[emb(&[1.0, 0.0]), other], Pooling::default()),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn single_frame_pool_equals_normalize() {
        let f = emb(&[0.3, -1.2, 4.5]);
        assert_eq!(
            mean_pool_frames(std::slice::from_ref(&f), Pooling::default()).unwrap(),
            normalize(&f).unwrap()
        );
    }

    #[test]
    fn ids_are_validated() {
        assert!(ModalityId::new("depth").is_ok());
        assert!(ModalityId::new("").is_err());
        assert!(ModalityId::new("Vision").is_err());
        assert!(ModalityId::new("vi sion").is_err());
        assert!(SpaceId::new("synth unified").is_err());
        assert!(Embedding::new(vec![], ModalityId::text(), SpaceId::new("s").unwrap()).is_err());
        assert!(matches!(
            Embedding::new(
                vec![f32::NAN],
                ModalityId::text(),
                SpaceId::new("s").unwrap()
            ),
            Err(Error::NonFiniteValue(_))
        ));
    }

    #[test]
    fn sample_needs_two_modalities() {
        let e = emb(&[1.0]);
        assert!(SampleRecord::new("a", [e.clone()], ConsistencyLabel::Unknown).is_err());
        assert!(SampleRecord::new("a", [e.clone(), e], ConsistencyLabel::Unknown).is_err());
    }
}
