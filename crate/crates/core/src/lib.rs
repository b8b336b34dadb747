//! Trimodal relevance scoring over embeddings from one joint space.
//!
//! Vision-text and text-audio cosine similarities are combined into a
//! composite score (sum, product or average of their absolute values) and a
//! balance score (mean absolute pairwise difference). Around that sit
//! distribution statistics, dataset formats, a synthetic generator, an HTTP
//! embedding client and report assembly.

pub mod dataset;
pub mod embedding;
pub mod error;
pub mod inference_client;
pub mod metrics;
pub mod report;
pub mod stats;
pub mod synthgen;

pub use dataset::{
    EmbeddingFile, EmbeddingFormat, EmbeddingRecord, PairingPlan, ScoreFormat, ScoreRow,
};
pub use embedding::{
    cosine, cosine_similarity, mean_pool_frames, normalize, ConsistencyLabel, Embedding,
    ModalityId, Pooling, SampleRecord, SpaceId,
};
pub use error::{Error, Result};
pub use metrics::{
    aggregate, clipclap_baseline, fair_score, majorscore, pair_similarities, score_sample,
    score_samples, AggregationKind, ModalityPair, PairScore, ScoreMethod, ScoreReport,
    ScoringOptions, SpacePolicy,
};
pub use report::{
    build_comparison, build_report, histogram, ComparisonInputs, ComparisonTable, Histogram, Report,
};
pub use stats::{summarize, Statistic, StatsError, StatsSummary, TTestVariant};
pub use synthgen::{generate, SynthConfig, SynthOutput};
