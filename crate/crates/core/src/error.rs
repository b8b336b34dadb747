use thiserror::Error;

use crate::embedding::{ModalityId, SpaceId};
use crate::inference_client::ClientError;
use crate::stats::StatsError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vector norm is below the zero threshold")]
    ZeroVector,

    #[error("empty frame sequence")]
    EmptySequence,

    #[error("non-finite value in {0}")]
    NonFiniteValue(String),

    #[error("invalid modality id {0:?}: must be non-empty, lowercase, without whitespace")]
    InvalidModality(String),

    #[error("invalid space id {0:?}: must be non-empty, without whitespace")]
    InvalidSpace(String),

    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),

    #[error("invalid sample {id:?}: {reason}")]
    InvalidSample { id: String, reason: String },

    #[error("sample {sample:?} has no {modality} embedding")]
    MissingModality {
        sample: String,
        modality: ModalityId,
    },

    #[error("pair {pair} spans two spaces ({left} vs {right}); cross-space scoring must be requested explicitly")]
    SpaceMismatch {
        pair: String,
        left: SpaceId,
        right: SpaceId,
    },

    #[error("invalid modality pair {0:?}")]
    InvalidPair(String),

    #[error("expected exactly 2 scores, got {0}")]
    WrongArity(usize),

    #[error("expected a {expected} pair, got {found}")]
    WrongPairLabel { expected: String, found: String },

    #[error("at least 2 scores are required, got {0}")]
    TooFewScores(usize),

    #[error(transparent)]
    Stats(#[from] StatsError),

    #[error("bad magic {0:?}, expected \"EMB1\"")]
    BadMagic([u8; 4]),

    #[error("unsupported emb1 version {0}")]
    UnsupportedVersion(u16),

    #[error("invalid header: {0}")]
    InvalidHeader(String),

    #[error("truncated file while reading {0}")]
    TruncatedFile(&'static str),

    #[error("{0} trailing bytes after the last record")]
    TrailingBytes(usize),

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    #[error("modality {0} appears in more than one input")]
    DuplicateModality(ModalityId),

    #[error("at least {needed} inputs are required, got {got}")]
    TooFewInputs { needed: usize, got: usize },

    #[error("no derangement exists for {0} sample(s)")]
    TooFewSamples(usize),

    #[error("no derangement found after {0} attempts")]
    DerangementNotFound(usize),

    #[error("reports are not strictly sorted by sample id: {previous:?} then {next:?}")]
    OrderingViolation { previous: String, next: String },

    #[error("column {0:?} not found")]
    ColumnNotFound(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid range [{lo}, {hi}]")]
    BadRange { lo: f64, hi: f64 },

    #[error("label mismatch in {context}: sample {sample:?} is {found}, expected {expected}")]
    LabelMismatch {
        context: &'static str,
        sample: String,
        expected: String,
        found: String,
    },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Client(#[from] ClientError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
