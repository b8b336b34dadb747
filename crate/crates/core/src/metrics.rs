//! Bimodal similarities and the scores composed from them.
//!
//! A joint-representation score takes the vision-text and text-audio cosine
//! similarities from one shared latent space and aggregates them (sum,
//! product or average of absolute values). The baseline applies the same
//! aggregation to similarities taken from two separately trained spaces.
//! The balance score is the mean absolute pairwise gap between bimodal
//! similarities; lower means the modalities agree on one scale.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{cosine_similarity, ConsistencyLabel, ModalityId, SampleRecord, SpaceId};
use crate::error::{Error, Result};

/// An ordered pair of distinct modalities, written `first:second`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModalityPair {
    first: ModalityId,
    second: ModalityId,
}

impl ModalityPair {
    pub fn new(first: ModalityId, second: ModalityId) -> Result<Self> {
        if first == second {
            return Err(Error::InvalidPair(format!("{first}:{second}")));
        }
        Ok(Self { first, second })
    }

    pub fn vision_text() -> Self {
        Self {
            first: ModalityId::vision(),
            second: ModalityId::text(),
        }
    }

    pub fn text_audio() -> Self {
        Self {
            first: ModalityId::text(),
            second: ModalityId::audio(),
        }
    }

    pub fn first(&self) -> &ModalityId {
        &self.first
    }

    pub fn second(&self) -> &ModalityId {
        &self.second
    }

    /// True when both pairs name the same two modalities in either order.
    pub fn same_modalities(&self, other: &ModalityPair) -> bool {
        (self.first == other.first && self.second == other.second)
            || (self.first == other.second && self.second == other.first)
    }

    /// Parses a comma-separated list such as `vision:text,text:audio`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for ModalityPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.first, self.second)
    }
}

impl FromStr for ModalityPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidPair(s.to_owned()))?;
        Self::new(a.parse()?, b.parse()?)
    }
}

impl TryFrom<String> for ModalityPair {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<ModalityPair> for String {
    fn from(value: ModalityPair) -> Self {
        value.to_string()
    }
}

/// A bimodal cosine similarity and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub pair: ModalityPair,
    pub value: f64,
    /// Space of the two embeddings. Cross-space pairs record both spaces
    /// joined with `+`.
    pub space: SpaceId,
}

/// Whether a pair's two embeddings must come from one latent space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpacePolicy {
    /// Both members share a space (joint-representation scoring).
    #[default]
    Joint,
    /// Members may come from different spaces (the two-model baseline).
    CrossSpace,
}

pub fn pair_similarities(
    sample: &SampleRecord,
    pairs: &[ModalityPair],
    policy: SpacePolicy,
) -> Result<Vec<PairScore>> {
    pairs
        .iter()
        .map(|pair| {
            let lookup = |m: &ModalityId| {
                sample.get(m).ok_or_else(|| Error::MissingModality {
                    sample: sample.id().to_owned(),
                    modality: m.clone(),
                })
            };
            let a = lookup(pair.first())?;
            let b = lookup(pair.second())?;
            let space = if a.space() == b.space() {
                a.space().clone()
            } else if policy == SpacePolicy::CrossSpace {
                SpaceId::new(format!("{}+{}", a.space(), b.space()))?
            } else {
                return Err(Error::SpaceMismatch {
                    pair: pair.to_string(),
                    left: a.space().clone(),
                    right: b.space().clone(),
                });
            };
            Ok(PairScore {
                pair: pair.clone(),
                value: cosine_similarity(a, b)?,
                space,
            })
        })
        .collect()
}

/// How two bimodal similarities are combined into one trimodal score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AggregationKind {
    #[serde(rename = "sum")]
    Sum,
    #[serde(rename = "prod")]
    Product,
    #[serde(rename = "avg")]
    Average,
}

impl AggregationKind {
    pub const ALL: [AggregationKind; 3] = [Self::Sum, Self::Product, Self::Average];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sum => "sum",
            Self::Product => "prod",
            Self::Average => "avg",
        }
    }
}

impl fmt::Display for AggregationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AggregationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Self::Sum),
            "prod" | "product" => Ok(Self::Product),
            "avg" | "average" => Ok(Self::Average),
            other => Err(Error::InvalidConfig(format!(
                "unknown aggregation {other:?}"
            ))),
        }
    }
}

// Shared by the joint score and the baseline so both produce identical
// numbers from identical inputs.
fn combine(x: f64, y: f64, kind: AggregationKind) -> f64 {
    match kind {
        AggregationKind::Sum => x + y,
        AggregationKind::Product => x * y,
        AggregationKind::Average => (x + y) / 2.0,
    }
}

/// Aggregates exactly two similarities.
///
/// With `abs_mode` the absolute values are combined; without it the raw
/// signed values are.
pub fn aggregate(scores: &[f64], kind: AggregationKind, abs_mode: bool) -> Result<f64> {
    let [s1, s2] = scores else {
        return Err(Error::WrongArity(scores.len()));
    };
    if abs_mode {
        Ok(combine(s1.abs(), s2.abs(), kind))
    } else {
        Ok(combine(*s1, *s2, kind))
    }
}

/// The two-model baseline: a vision-text score from one contrastive space and
/// a text-audio score from another, combined like [`aggregate`] in abs mode.
pub fn clipclap_baseline(
    clip_pair: &PairScore,
    clap_pair: &PairScore,
    kind: AggregationKind,
) -> Result<f64> {
    for (score, expected) in [
        (clip_pair, ModalityPair::vision_text()),
        (clap_pair, ModalityPair::text_audio()),
    ] {
        if !score.pair.same_modalities(&expected) {
            return Err(Error::WrongPairLabel {
                expected: expected.to_string(),
                found: score.pair.to_string(),
            });
        }
    }
    Ok(combine(clip_pair.value.abs(), clap_pair.value.abs(), kind))
}

/// Mean absolute pairwise difference among `K >= 2` bimodal similarities.
pub fn fair_score(scores: &[f64]) -> Result<f64> {
    if scores.len() < 2 {
        return Err(Error::TooFewScores(scores.len()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFiniteValue("fair score input".into()));
    }
    // Sorting fixes the summation order, so the result does not depend on
    // input order.
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let mut total = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            total += sorted[j] - sorted[i];
        }
    }
    let terms = (k * (k - 1) / 2) as f64;
    Ok(total / terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMethod {
    /// Both similarities from one joint space.
    #[default]
    Majorscore,
    /// Similarities from two separate contrastive spaces.
    Clipclap,
}

#[derive(Debug, Clone)]
pub struct ScoringOptions {
    pub pairs: Vec<ModalityPair>,
    pub abs_mode: bool,
    pub method: ScoreMethod,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        Self {
            pairs: vec![ModalityPair::vision_text(), ModalityPair::text_audio()],
            abs_mode: true,
            method: ScoreMethod::Majorscore,
        }
    }
}

impl ScoringOptions {
    pub fn baseline() -> Self {
        Self {
            method: ScoreMethod::Clipclap,
            ..Self::default()
        }
    }
}

/// Per-sample scores. For [`ScoreMethod::Clipclap`] the `majorscore_*`
/// fields carry the baseline's aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub sample_id: String,
    pub label: ConsistencyLabel,
    pub method: ScoreMethod,
    pub pair_scores: Vec<PairScore>,
    pub majorscore_sum: f64,
    pub majorscore_prod: f64,
    pub majorscore_avg: f64,
    pub fair_score: f64,
}

impl ScoreReport {
    pub fn aggregate(&self, kind: AggregationKind) -> f64 {
        match kind {
            AggregationKind::Sum => self.majorscore_sum,
            AggregationKind::Product => self.majorscore_prod,
            AggregationKind::Average => self.majorscore_avg,
        }
    }
}

/// Joint-representation score of one sample over vision:text and text:audio,
/// absolute values aggregated.
pub fn majorscore(sample: &SampleRecord) -> Result<ScoreReport> {
    score_sample(sample, &ScoringOptions::default())
}

pub fn score_sample(sample: &SampleRecord, options: &ScoringOptions) -> Result<ScoreReport> {
    if options.pairs.len() != 2 {
        return Err(Error::WrongArity(options.pairs.len()));
    }
    let policy = match options.method {
        ScoreMethod::Majorscore => SpacePolicy::Joint,
        ScoreMethod::Clipclap => SpacePolicy::CrossSpace,
    };
    let pair_scores = pair_similarities(sample, &options.pairs, policy)?;
    let values: Vec<f64> = pair_scores.iter().map(|p| p.value).collect();
    let agg = |kind| match options.method {
        ScoreMethod::Majorscore => aggregate(&values, kind, options.abs_mode),
        ScoreMethod::Clipclap => clipclap_baseline(&pair_scores[0], &pair_scores[1], kind),
    };
    Ok(ScoreReport {
        sample_id: sample.id().to_owned(),
        label: sample.label(),
        method: options.method,
        majorscore_sum: agg(AggregationKind::Sum)?,
        majorscore_prod: agg(AggregationKind::Product)?,
        majorscore_avg: agg(AggregationKind::Average)?,
        fair_score: fair_score(&values)?,
        pair_scores,
    })
}

/// Scores samples in parallel; the output is sorted by sample id.
pub fn score_samples(
    samples: &[SampleRecord],
    options: &ScoringOptions,
) -> Result<Vec<ScoreReport>> {
    let mut reports = samples
        .par_iter()
        .map(|s| score_sample(s, options))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    Ok(reports)
}
