//! Statistics comparing two score populations, typically the vision-text and
//! text-audio similarities of the same samples.
//!
//! All sums run left to right in `f64`. Standard deviations use the `n - 1`
//! denominator; skewness uses the biased `1/n` central moments.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("empty input")]
    EmptyInput,
    #[error("at least {needed} elements are required, got {got}")]
    TooFewElements { needed: usize, got: usize },
    #[error("pooled variance is zero")]
    ZeroPooledVariance,
    #[error("variance is zero")]
    ZeroVariance,
    #[error("paired inputs differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

impl Serialize for StatsError {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestVariant {
    /// Per-sample differences; both sequences come from the same samples.
    #[default]
    Paired,
    /// Unequal-variance two-sample statistic.
    Welch,
}

impl FromStr for TTestVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paired" => Ok(Self::Paired),
            "welch" => Ok(Self::Welch),
            other => Err(format!("unknown t-test variant {other:?}")),
        }
    }
}

impl fmt::Display for TTestVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Paired => "paired",
            Self::Welch => "welch",
        })
    }
}

fn require(xs: &[f64], needed: usize) -> Result<(), StatsError> {
    if xs.is_empty() {
        Err(StatsError::EmptyInput)
    } else if xs.len() < needed {
        Err(StatsError::TooFewElements {
            needed,
            got: xs.len(),
        })
    } else {
        Ok(())
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

// Exact test: a constant sequence has zero spread even when its rounded mean
// differs from the elements by an ulp.
fn is_constant(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

fn central_moment_sum(xs: &[f64], power: i32) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(power)).sum()
}

fn sample_variance(xs: &[f64]) -> f64 {
    if is_constant(xs) {
        return 0.0;
    }
    central_moment_sum(xs, 2) / (xs.len() - 1) as f64
}

/// `|mean(a) - mean(b)|`.
pub fn mean_diff(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    require(a, 1)?;
    require(b, 1)?;
    Ok((mean(a) - mean(b)).abs())
}

/// `|sd(a) - sd(b)|` with sample standard deviations.
pub fn std_dev_diff(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    require(a, 2)?;
    require(b, 2)?;
    Ok((sample_variance(a).sqrt() - sample_variance(b).sqrt()).abs())
}

/// Absolute standardized mean difference using the pooled standard deviation.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    require(a, 2)?;
    require(b, 2)?;
    if is_constant(a) && is_constant(b) {
        return Err(StatsError::ZeroPooledVariance);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled =
        ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0);
    Ok((mean(a) - mean(b)).abs() / pooled.sqrt())
}

/// The t statistic (not a p-value).
pub fn t_test(a: &[f64], b: &[f64], variant: TTestVariant) -> Result<f64, StatsError> {
    match variant {
        TTestVariant::Paired => {
            if a.len() != b.len() {
                return Err(StatsError::LengthMismatch {
                    left: a.len(),
                    right: b.len(),
                });
            }
            require(a, 2)?;
            let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            if is_constant(&diffs) {
                return Err(StatsError::ZeroVariance);
            }
            let n = diffs.len() as f64;
            let sd = sample_variance(&diffs).sqrt();
            Ok(mean(&diffs) / (sd / n.sqrt()))
        }
        TTestVariant::Welch => {
            require(a, 2)?;
            require(b, 2)?;
            if is_constant(a) && is_constant(b) {
                return Err(StatsError::ZeroVariance);
            }
            let se =
                (sample_variance(a) / a.len() as f64 + sample_variance(b) / b.len() as f64).sqrt();
            Ok((mean(a) - mean(b)) / se)
        }
    }
}

/// Fisher-Pearson skewness `g1 = m3 / m2^(3/2)`.
pub fn skewness(a: &[f64]) -> Result<f64, StatsError> {
    require(a, 3)?;
    if is_constant(a) {
        return Err(StatsError::ZeroVariance);
    }
    let n = a.len() as f64;
    let m2 = central_moment_sum(a, 2) / n;
    let m3 = central_moment_sum(a, 3) / n;
    Ok(m3 / m2.powf(1.5))
}

/// A statistic that may be undefined for degenerate data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    Value(f64),
    Undefined(StatsError),
}

impl Statistic {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(v),
            Self::Undefined(_) => None,
        }
    }

    pub fn into_result(self) -> Result<f64, StatsError> {
        match self {
            Self::Value(v) => Ok(v),
            Self::Undefined(e) => Err(e),
        }
    }
}

impl From<Result<f64, StatsError>> for Statistic {
    fn from(r: Result<f64, StatsError>) -> Self {
        match r {
            Ok(v) => Self::Value(v),
            Err(e) => Self::Undefined(e),
        }
    }
}

impl Serialize for Statistic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            Self::Value(v) => serializer.serialize_f64(*v),
            Self::Undefined(e) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("undefined", e)?;
                map.end()
            }
        }
    }
}

/// Which distribution the summary's skewness describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkewnessTarget {
    /// Elementwise `a - b`, used when both sequences have equal length.
    PairedDifferences,
    /// `a` followed by `b`.
    Concatenation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsSummary {
    pub mean_diff: f64,
    pub cohens_d: Statistic,
    pub t_value: Statistic,
    pub std_dev_diff: f64,
    pub skewness: Statistic,
    pub n_a: usize,
    pub n_b: usize,
    pub t_variant: TTestVariant,
    pub skewness_target: SkewnessTarget,
}

/// Computes every comparison statistic on the same pair of sequences.
///
/// Structural problems (too few elements, paired lengths differing) are
/// errors; statistics that are undefined for this particular data (zero
/// variance) are reported per field.
pub fn summarize(a: &[f64], b: &[f64], variant: TTestVariant) -> Result<StatsSummary, StatsError> {
    require(a, 2)?;
    require(b, 2)?;
    if variant == TTestVariant::Paired && a.len() != b.len() {
        return Err(StatsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (skewness_target, skew_input): (_, Vec<f64>) = if a.len() == b.len() {
        (
            SkewnessTarget::PairedDifferences,
            a.iter().zip(b).map(|(x, y)| x - y).collect(),
        )
    } else {
        (
            SkewnessTarget::Concatenation,
            a.iter().chain(b).copied().collect(),
        )
    };
    Ok(StatsSummary {
        mean_diff: mean_diff(a, b)?,
        cohens_d: cohens_d(a, b).into(),
        t_value: t_test(a, b, variant).into(),
        std_dev_diff: std_dev_diff(a, b)?,
        skewness: skewness(&skew_input).into(),
        n_a: a.len(),
        n_b: b.len(),
        t_variant: variant,
        skewness_target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn mean_diff_examples() {
        assert!(close(mean_diff(&[0.1, 0.3], &[0.2, 0.6]).unwrap(), 0.2));
        assert_eq!(mean_diff(&[0.4, 0.9], &[0.4, 0.9]).unwrap(), 0.0);
        assert_eq!(mean_diff(&[1.0], &[3.0]).unwrap(), 2.0);
        assert_eq!(mean_diff(&[], &[3.0]), Err(StatsError::EmptyInput));
    }

    #[test]
    fn std_dev_diff_examples() {
        assert_eq!(
            std_dev_diff(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            0.0
        );
        assert!(close(
            std_dev_diff(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(),
            1.0
        ));
        assert!(close(std_dev_diff(&[0.0, 0.0], &[0.0, 1.0]).unwrap(), H));
        assert_eq!(
            std_dev_diff(&[1.0], &[1.0, 2.0]),
            Err(StatsError::TooFewElements { needed: 2, got: 1 })
        );
    }

    #[test]
    fn cohens_d_examples() {
        assert!(close(
            cohens_d(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap(),
            1.0
        ));
        assert_eq!(cohens_d(&[0.3, 0.5, 0.9], &[0.3, 0.5, 0.9]).unwrap(), 0.0);
        assert_eq!(
            cohens_d(&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]),
            Err(StatsError::ZeroPooledVariance)
        );
    }

    #[test]
    fn t_test_examples() {
        let t = t_test(
            &[1.0, 2.0, 3.0, 4.0],
            &[2.0, 2.0, 4.0, 4.0],
            TTestVariant::Paired,
        )
        .unwrap();
        assert!(close(t, -3f64.sqrt()));
        let x = [0.2, 0.7, 0.4];
        assert_eq!(
            t_test(&x, &x, TTestVariant::Paired),
            Err(StatsError::ZeroVariance)
        );
        assert_eq!(
            t_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], TTestVariant::Welch).unwrap(),
            0.0
        );
        assert_eq!(
            t_test(&[1.0, 2.0], &[1.0, 2.0, 3.0], TTestVariant::Paired),
            Err(StatsError::LengthMismatch { left: 2, right: 3 })
        );
        assert_eq!(
            t_test(&[1.0, 1.0], &[2.0, 2.0], TTestVariant::Welch),
            Err(StatsError::ZeroVariance)
        );
    }

    #[test]
    fn skewness_examples() {
        assert_eq!(skewness(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(close(skewness(&[1.0, 1.0, 4.0]).unwrap(), H));
        assert!(close(skewness(&[-4.0, -1.0, -1.0]).unwrap(), -H));
        assert_eq!(
            skewness(&[1.0, 2.0]),
            Err(StatsError::TooFewElements { needed: 3, got: 2 })
        );
        assert_eq!(skewness(&[0.1, 0.1, 0.1]), Err(StatsError::ZeroVariance));
    }

    #[test]
    fn summarize_identical_inputs() {
        let x = [0.2, 0.5, 0.9, 0.4];
        let s = summarize(&x, &x, TTestVariant::Paired).unwrap();
        assert_eq!(s.mean_diff, 0.0);
        assert_eq!(s.std_dev_diff, 0.0);
        assert_eq!(s.cohens_d, Statistic::Value(0.0));
        assert_eq!(s.t_value, Statistic::Undefined(StatsError::ZeroVariance));
        assert_eq!(s.skewness, Statistic::Undefined(StatsError::ZeroVariance));
        assert_eq!(s.skewness_target, SkewnessTarget::PairedDifferences);
    }

    #[test]
    fn summarize_welch_example() {
        let s = summarize(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], TTestVariant::Welch).unwrap();
        assert!(close(s.mean_diff, 1.0));
        assert!(close(s.cohens_d.value().unwrap(), 1.0));
        assert!(close(s.std_dev_diff, 0.0));
        let s = summarize(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0, 8.0], TTestVariant::Welch).unwrap();
        assert_eq!(s.skewness_target, SkewnessTarget::Concatenation);
    }

    #[test]
    fn summary_serializes_undefined_fields() {
        let x = [0.2, 0.5, 0.9];
        let json = serde_json::to_value(summarize(&x, &x, TTestVariant::Paired).unwrap()).unwrap();
        assert_eq!(json["t_value"]["undefined"], "variance is zero");
        assert_eq!(json["cohens_d"], 0.0);
        assert_eq!(json["skewness_target"], "paired_differences");
    }
}
