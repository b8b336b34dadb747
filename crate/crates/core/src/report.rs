//! Score distributions and method comparisons, emitted as data.
//!
//! See `docs/report-schema.md` for the JSON layout.

use serde::Serialize;

use crate::dataset::ScoreRow;
use crate::embedding::ConsistencyLabel;
use crate::error::{Error, Result};
use crate::metrics::{AggregationKind, ScoreMethod};
use crate::stats::{summarize, StatsSummary, TTestVariant};

/// Equal-width histogram. `n_total` counts in-range values only, so
/// `n_total + overflow` is the input length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_total: u64,
    /// Values outside the range, and non-finite values.
    pub overflow: u64,
}

/// Bins `values` into `bins` equal-width bins over `range`, or over the data
/// min/max when no range is given. Every bin is half-open except the last,
/// which also holds its right edge.
pub fn histogram(values: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::EmptyInput("histogram values"));
    }
    if bins == 0 {
        return Err(Error::InvalidConfig(
            "histogram needs at least one bin".into(),
        ));
    }
    let (lo, hi) = match range {
        Some((lo, hi)) => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::BadRange { lo, hi });
            }
            (lo, hi)
        }
        None => {
            let finite = values.iter().copied().filter(|v| v.is_finite());
            let (min, max) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            });
            if min > max {
                return Err(Error::EmptyInput("finite histogram values"));
            }
            if min == max {
                (min - 0.5, max + 0.5)
            } else {
                (min, max)
            }
        }
    };

    let width = hi - lo;
    let mut bin_edges: Vec<f64> = (0..bins)
        .map(|i| lo + width * (i as f64) / (bins as f64))
        .collect();
    bin_edges.push(hi);

    let mut counts = vec![0u64; bins];
    let mut overflow = 0u64;
    for &v in values {
        if !(v >= lo && v <= hi) {
            overflow += 1;
            continue;
        }
        let mut i = (((v - lo) / width) * bins as f64).floor() as usize;
        i = i.min(bins - 1);
        // settle rounding against the stored edges
        while i > 0 && v < bin_edges[i] {
            i -= 1;
        }
        while i + 1 < bins && v >= bin_edges[i + 1] {
            i += 1;
        }
        counts[i] += 1;
    }
    Ok(Histogram {
        bin_edges,
        n_total: counts.iter().sum(),
        counts,
        overflow,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Consistent,
    Mispaired,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::Consistent, Condition::Mispaired];

    fn label(self) -> ConsistencyLabel {
        match self {
            Self::Consistent => ConsistencyLabel::Consistent,
            Self::Mispaired => ConsistencyLabel::Mispaired,
        }
    }
}

/// One value per aggregation kind, named like the score columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerKind<T> {
    pub sum: T,
    pub prod: T,
    pub avg: T,
}

impl<T> PerKind<T> {
    pub fn from_fn(mut f: impl FnMut(AggregationKind) -> T) -> Self {
        Self {
            sum: f(AggregationKind::Sum),
            prod: f(AggregationKind::Product),
            avg: f(AggregationKind::Average),
        }
    }

    pub fn get(&self, kind: AggregationKind) -> &T {
        match kind {
            AggregationKind::Sum => &self.sum,
            AggregationKind::Product => &self.prod,
            AggregationKind::Average => &self.avg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanWithError {
    pub mean: f64,
    /// Sample standard deviation over sqrt(n).
    pub std_err: f64,
}

fn mean_with_error(values: &[f64]) -> MeanWithError {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std_err = if values.len() < 2 {
        f64::NAN
    } else {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1.0)).sqrt() / n.sqrt()
    };
    MeanWithError { mean, std_err }
}

/// Statistics for one condition scored by one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub n: usize,
    /// First pair scores against second pair scores.
    pub stats: StatsSummary,
    /// `None` for a kind that is missing from any row.
    pub composite: PerKind<Option<MeanWithError>>,
    pub fair_score: MeanWithError,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonCell {
    pub condition: Condition,
    pub method: ScoreMethod,
    /// `None` when no scores were supplied for this cell.
    pub summary: Option<CellSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeChange {
    pub condition: Condition,
    /// `(mean_majorscore - mean_clipclap) / mean_clipclap`; `None` when a side
    /// is absent or the baseline mean is zero.
    pub change: PerKind<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub t_variant: TTestVariant,
    /// Always the four condition x method cells, consistent first, majorscore first.
    pub cells: Vec<ComparisonCell>,
    pub relative_change: Vec<RelativeChange>,
}

impl ComparisonTable {
    pub fn cell(&self, condition: Condition, method: ScoreMethod) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.condition == condition && c.method == method)
            .and_then(|c| c.summary.as_ref())
    }
}

/// Score lists for each condition and method; any may be left out.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComparisonInputs<'a> {
    pub majorscore_consistent: Option<&'a [ScoreRow]>,
    pub majorscore_mispaired: Option<&'a [ScoreRow]>,
    pub clipclap_consistent: Option<&'a [ScoreRow]>,
    pub clipclap_mispaired: Option<&'a [ScoreRow]>,
}

impl<'a> ComparisonInputs<'a> {
    pub fn get(&self, condition: Condition, method: ScoreMethod) -> Option<&'a [ScoreRow]> {
        match (condition, method) {
            (Condition::Consistent, ScoreMethod::Majorscore) => self.majorscore_consistent,
            (Condition::Mispaired, ScoreMethod::Majorscore) => self.majorscore_mispaired,
            (Condition::Consistent, ScoreMethod::Clipclap) => self.clipclap_consistent,
            (Condition::Mispaired, ScoreMethod::Clipclap) => self.clipclap_mispaired,
        }
    }
}

/// Rows may be unlabelled; any label present must match the condition.
fn check_labels(rows: &[ScoreRow], condition: Condition, method: ScoreMethod) -> Result<()> {
    let expected = condition.label();
    for r in rows {
        if r.label != ConsistencyLabel::Unknown && r.label != expected {
            return Err(Error::LabelMismatch {
                context: match method {
                    ScoreMethod::Majorscore => "majorscore scores",
                    ScoreMethod::Clipclap => "clipclap scores",
                },
                sample: r.sample_id.clone(),
                expected: expected.to_string(),
                found: r.label.to_string(),
            });
        }
    }
    Ok(())
}

fn summarize_cell(rows: &[ScoreRow], variant: TTestVariant) -> Result<CellSummary> {
    let first: Vec<f64> = rows.iter().map(|r| r.s_vt).collect();
    let second: Vec<f64> = rows.iter().map(|r| r.s_ta).collect();
    let fair: Vec<f64> = rows.iter().map(|r| r.fair_score).collect();
    let composite = PerKind::from_fn(|kind| {
        rows.iter()
            .map(|r| r.aggregate(kind))
            .collect::<Option<Vec<f64>>>()
            .map(|v| mean_with_error(&v))
    });
    Ok(CellSummary {
        n: rows.len(),
        stats: summarize(&first, &second, variant)?,
        composite,
        fair_score: mean_with_error(&fair),
    })
}

/// Summarizes every supplied cell and the majorscore-vs-clipclap change of
/// the composite means within each condition.
pub fn build_comparison(
    inputs: &ComparisonInputs<'_>,
    variant: TTestVariant,
) -> Result<ComparisonTable> {
    if Condition::ALL.iter().all(|&c| {
        inputs.get(c, ScoreMethod::Majorscore).is_none()
            && inputs.get(c, ScoreMethod::Clipclap).is_none()
    }) {
        return Err(Error::EmptyInput(
            "comparison needs at least one score list",
        ));
    }
    let mut cells = Vec::with_capacity(4);
    for condition in Condition::ALL {
        for method in [ScoreMethod::Majorscore, ScoreMethod::Clipclap] {
            let summary = match inputs.get(condition, method) {
                None => None,
                Some([]) => return Err(Error::EmptyInput("score list")),
                Some(rows) => {
                    check_labels(rows, condition, method)?;
                    Some(summarize_cell(rows, variant)?)
                }
            };
            cells.push(ComparisonCell {
                condition,
                method,
                summary,
            });
        }
    }

    let mut table = ComparisonTable {
        t_variant: variant,
        cells,
        relative_change: Vec::new(),
    };
    for condition in Condition::ALL {
        let major = table.cell(condition, ScoreMethod::Majorscore);
        let base = table.cell(condition, ScoreMethod::Clipclap);
        let change = PerKind::from_fn(|kind| {
            let m = (*major?.composite.get(kind))?.mean;
            let b = (*base?.composite.get(kind))?.mean;
            (b != 0.0).then(|| (m - b) / b)
        });
        table
            .relative_change
            .push(RelativeChange { condition, change });
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedHistogram {
    /// Score column the values came from.
    pub column: String,
    pub condition: Condition,
    pub method: ScoreMethod,
    #[serde(flatten)]
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub tool_version: String,
    pub bins: usize,
    pub range: Option<(f64, f64)>,
    pub decisions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub histograms: Vec<NamedHistogram>,
    pub comparison: ComparisonTable,
    pub metadata: ReportMetadata,
}

pub const REPORT_DECISIONS: [&str; 5] = [
    "relative_change = (mean_majorscore - mean_clipclap) / mean_clipclap, per aggregation kind and condition",
    "relative_change is null when either side is absent or the clipclap mean is 0",
    "histograms use equal-width bins; the last bin includes its right edge; out-of-range and non-finite values are counted in overflow",
    "stats compare the first pair score column (s_vt) against the second (s_ta)",
    "std_err is the sample standard deviation over sqrt(n)",
];

const HISTOGRAM_COLUMNS: [&str; 6] = [
    "s_vt",
    "s_ta",
    "majorscore_sum",
    "majorscore_prod",
    "majorscore_avg",
    "fair_score",
];

fn column(rows: &[ScoreRow], name: &str) -> Option<Vec<f64>> {
    rows.iter()
        .map(|r| match name {
            "s_vt" => Some(r.s_vt),
            "s_ta" => Some(r.s_ta),
            "majorscore_sum" => r.majorscore_sum,
            "majorscore_prod" => r.majorscore_prod,
            "majorscore_avg" => r.majorscore_avg,
            "fair_score" => Some(r.fair_score),
            _ => None,
        })
        .collect()
}

/// Comparison table plus one histogram per supplied cell and score column.
/// Columns absent from a cell's rows are skipped.
pub fn build_report(
    inputs: &ComparisonInputs<'_>,
    variant: TTestVariant,
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<Report> {
    let comparison = build_comparison(inputs, variant)?;
    let mut histograms = Vec::new();
    for condition in Condition::ALL {
        for method in [ScoreMethod::Majorscore, ScoreMethod::Clipclap] {
            let Some(rows) = inputs.get(condition, method) else {
                continue;
            };
            for name in HISTOGRAM_COLUMNS {
                if let Some(values) = column(rows, name) {
                    histograms.push(NamedHistogram {
                        column: name.to_owned(),
                        condition,
                        method,
                        histogram: histogram(&values, bins, range)?,
                    });
                }
            }
        }
    }
    Ok(Report {
        histograms,
        comparison,
        metadata: ReportMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            bins,
            range,
            decisions: REPORT_DECISIONS.iter().map(|s| (*s).to_owned()).collect(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_single_bin() {
        let h = histogram(&[0.5], 1, Some((0.0, 1.0))).unwrap();
        assert_eq!(h.counts, vec![1]);
        assert_eq!(h.bin_edges, vec![0.0, 1.0]);
    }

    #[test]
    fn last_bin_is_closed() {
        let h = histogram(&[0.0, 0.5, 1.0], 2, Some((0.0, 1.0))).unwrap();
        assert_eq!(h.counts, vec![1, 2]);
        assert_eq!(h.overflow, 0);
    }

    #[test]
    fn out_of_range_goes_to_overflow() {
        let h = histogram(&[-0.1, 0.2, 1.5, f64::NAN], 4, Some((0.0, 1.0))).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 1);
        assert_eq!(h.overflow, 3);
        assert_eq!(h.n_total + h.overflow, 4);
    }

    #[test]
    fn default_range_and_constant_data() {
        let h = histogram(&[2.0, 4.0, 3.0], 2, None).unwrap();
        assert_eq!(h.bin_edges, vec![2.0, 3.0, 4.0]);
        assert_eq!(h.counts, vec![1, 2]);
        let flat = histogram(&[7.0; 5], 3, None).unwrap();
        assert_eq!(flat.counts.iter().sum::<u64>(), 5);
        assert_eq!(flat.bin_edges[0], 6.5);
    }

    #[test]
    fn histogram_errors() {
        assert!(matches!(histogram(&[], 3, None), Err(Error::EmptyInput(_))));
        assert!(matches!(
            histogram(&[1.0], 3, Some((1.0, 1.0))),
            Err(Error::BadRange { .. })
        ));
        assert!(matches!(
            histogram(&[1.0], 3, Some((2.0, 1.0))),
            Err(Error::BadRange { .. })
        ));
        assert!(matches!(
            histogram(&[f64::NAN], 3, None),
            Err(Error::EmptyInput(_))
        ));
    }

    fn rows(label: ConsistencyLabel, pairs: &[(f64, f64)]) -> Vec<ScoreRow> {
        pairs
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| ScoreRow {
                sample_id: format!("s{i:03}"),
                label,
                s_vt: a,
                s_ta: b,
                majorscore_sum: Some(a.abs() + b.abs()),
                majorscore_prod: Some(a.abs() * b.abs()),
                majorscore_avg: Some((a.abs() + b.abs()) / 2.0),
                fair_score: (a - b).abs(),
            })
            .collect()
    }

    #[test]
    fn identical_methods_give_zero_change() {
        let c = rows(
            ConsistencyLabel::Consistent,
            &[(0.5, 0.4), (0.6, 0.2), (0.3, 0.35)],
        );
        let m = rows(
            ConsistencyLabel::Mispaired,
            &[(0.1, 0.0), (0.2, -0.1), (0.05, 0.1)],
        );
        let inputs = ComparisonInputs {
            majorscore_consistent: Some(&c),
            majorscore_mispaired: Some(&m),
            clipclap_consistent: Some(&c),
            clipclap_mispaired: Some(&m),
        };
        let t = build_comparison(&inputs, TTestVariant::Paired).unwrap();
        for rc in &t.relative_change {
            for kind in AggregationKind::ALL {
                assert_eq!(*rc.change.get(kind), Some(0.0));
            }
        }
    }

    #[test]
    fn relative_change_uses_baseline_denominator() {
        // sum means 1.26 and 1.00
        let major = rows(ConsistencyLabel::Consistent, &[(0.63, 0.63), (0.63, 0.63)]);
        let base = rows(ConsistencyLabel::Consistent, &[(0.5, 0.5), (0.5, 0.5)]);
        let inputs = ComparisonInputs {
            majorscore_consistent: Some(&major),
            clipclap_consistent: Some(&base),
            ..Default::default()
        };
        let t = build_comparison(&inputs, TTestVariant::Welch).unwrap();
        let change = t.relative_change[0].change.sum.unwrap();
        assert!((change - 0.26).abs() < 1e-12);
        assert!(t
            .cell(Condition::Mispaired, ScoreMethod::Majorscore)
            .is_none());
        assert_eq!(t.relative_change[1].change.sum, None);
        assert_eq!(t.cells.len(), 4);
    }

    #[test]
    fn label_and_emptiness_checks() {
        let m = rows(ConsistencyLabel::Mispaired, &[(0.1, 0.2), (0.3, 0.1)]);
        let wrong = ComparisonInputs {
            majorscore_consistent: Some(&m),
            ..Default::default()
        };
        assert!(matches!(
            build_comparison(&wrong, TTestVariant::Paired),
            Err(Error::LabelMismatch { .. })
        ));
        let empty = ComparisonInputs {
            majorscore_consistent: Some(&[]),
            ..Default::default()
        };
        assert!(matches!(
            build_comparison(&empty, TTestVariant::Paired),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            build_comparison(&ComparisonInputs::default(), TTestVariant::Paired),
            Err(Error::EmptyInput(_))
        ));
        let unknown = rows(ConsistencyLabel::Unknown, &[(0.1, 0.2), (0.3, 0.1)]);
        let ok = ComparisonInputs {
            majorscore_mispaired: Some(&unknown),
            ..Default::default()
        };
        assert!(build_comparison(&ok, TTestVariant::Paired).is_ok());
    }

    #[test]
    fn report_has_histograms_per_column() {
        let c = rows(
            ConsistencyLabel::Consistent,
            &[(0.5, 0.4), (0.6, 0.2), (0.3, 0.35)],
        );
        let inputs = ComparisonInputs {
            majorscore_consistent: Some(&c),
            ..Default::default()
        };
        let r = build_report(&inputs, TTestVariant::Paired, 4, Some((-1.0, 2.0))).unwrap();
        assert_eq!(r.histograms.len(), 6);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["metadata"]["decisions"].is_array());
        assert!(json["histograms"][0]["bin_edges"].is_array());
    }
}
