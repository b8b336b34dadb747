//! Score tables.
//!
//! CSV columns, in this order: `sample_id, label, s_vt, s_ta, majorscore_sum,
//! majorscore_prod, majorscore_avg, fair_score`. `s_vt` and `s_ta` hold the
//! first and second scored pair. Aggregates that were not requested are
//! empty cells in CSV and `null` in JSON lines.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::ConsistencyLabel;
use crate::error::{Error, Result};
use crate::metrics::{AggregationKind, ScoreReport};

pub const SCORE_COLUMNS: [&str; 8] = [
    "sample_id",
    "label",
    "s_vt",
    "s_ta",
    "majorscore_sum",
    "majorscore_prod",
    "majorscore_avg",
    "fair_score",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreFormat {
    Jsonl,
    Csv,
}

impl ScoreFormat {
    /// `.csv` is CSV; anything else is JSON lines.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::Csv,
            _ => Self::Jsonl,
        }
    }
}

/// One flattened line of a score table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub sample_id: String,
    pub label: ConsistencyLabel,
    pub s_vt: f64,
    pub s_ta: f64,
    pub majorscore_sum: Option<f64>,
    pub majorscore_prod: Option<f64>,
    pub majorscore_avg: Option<f64>,
    pub fair_score: f64,
}

impl ScoreRow {
    /// Flattens a report, keeping only the requested aggregates.
    pub fn from_report(report: &ScoreReport, kinds: &[AggregationKind]) -> Self {
        let pick = |k: AggregationKind| kinds.contains(&k).then(|| report.aggregate(k));
        Self {
            sample_id: report.sample_id.clone(),
            label: report.label,
            s_vt: report.pair_scores[0].value,
            s_ta: report.pair_scores[1].value,
            majorscore_sum: pick(AggregationKind::Sum),
            majorscore_prod: pick(AggregationKind::Product),
            majorscore_avg: pick(AggregationKind::Average),
            fair_score: report.fair_score,
        }
    }

    pub fn aggregate(&self, kind: AggregationKind) -> Option<f64> {
        match kind {
            AggregationKind::Sum => self.majorscore_sum,
            AggregationKind::Product => self.majorscore_prod,
            AggregationKind::Average => self.majorscore_avg,
        }
    }
}

fn check_order(rows: &[ScoreRow]) -> Result<()> {
    for w in rows.windows(2) {
        if w[0].sample_id >= w[1].sample_id {
            return Err(Error::OrderingViolation {
                previous: w[0].sample_id.clone(),
                next: w[1].sample_id.clone(),
            });
        }
    }
    Ok(())
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes rows that must already be strictly sorted by sample id.
pub fn write_score_rows<W: Write>(rows: &[ScoreRow], out: W, format: ScoreFormat) -> Result<()> {
    check_order(rows)?;
    match format {
        ScoreFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(SCORE_COLUMNS)?;
            for r in rows {
                w.write_record([
                    r.sample_id.clone(),
                    r.label.to_string(),
                    r.s_vt.to_string(),
                    r.s_ta.to_string(),
                    cell(r.majorscore_sum),
                    cell(r.majorscore_prod),
                    cell(r.majorscore_avg),
                    r.fair_score.to_string(),
                ])?;
            }
            w.flush()?;
        }
        ScoreFormat::Jsonl => {
            let mut w = BufWriter::new(out);
            for r in rows {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_scores(
    reports: &[ScoreReport],
    kinds: &[AggregationKind],
    path: impl AsRef<Path>,
    format: ScoreFormat,
) -> Result<()> {
    let rows: Vec<ScoreRow> = reports
        .iter()
        .map(|r| ScoreRow::from_report(r, kinds))
        .collect();
    check_order(&rows)?;
    write_score_rows(&rows, File::create(path)?, format)
}

fn parse_f64(s: &str, column: &str, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("column {column}: {s:?} is not a number"),
    })
}

fn parse_opt(s: &str, column: &str, line: usize) -> Result<Option<f64>> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        parse_f64(s, column, line).map(Some)
    }
}

fn read_csv<R: Read>(input: R) -> Result<Vec<ScoreRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let mut idx = [0usize; 8];
    for (slot, name) in idx.iter_mut().zip(SCORE_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::ColumnNotFound(name.to_owned()))?;
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let get = |k: usize| record.get(idx[k]).unwrap_or("");
        rows.push(ScoreRow {
            sample_id: get(0).to_owned(),
            label: get(1).parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad label {:?}", get(1)),
            })?,
            s_vt: parse_f64(get(2), SCORE_COLUMNS[2], line)?,
            s_ta: parse_f64(get(3), SCORE_COLUMNS[3], line)?,
            majorscore_sum: parse_opt(get(4), SCORE_COLUMNS[4], line)?,
            majorscore_prod: parse_opt(get(5), SCORE_COLUMNS[5], line)?,
            majorscore_avg: parse_opt(get(6), SCORE_COLUMNS[6], line)?,
            fair_score: parse_f64(get(7), SCORE_COLUMNS[7], line)?,
        });
    }
    Ok(rows)
}

fn read_jsonl<R: Read>(input: R) -> Result<Vec<ScoreRow>> {
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if let Some(missing) = SCORE_COLUMNS.iter().find(|c| value.get(**c).is_none()) {
            return Err(Error::ColumnNotFound((*missing).to_owned()));
        }
        rows.push(serde_json::from_value(value).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(rows)
}

pub fn read_scores_from<R: Read>(input: R, format: ScoreFormat) -> Result<Vec<ScoreRow>> {
    match format {
        ScoreFormat::Csv => read_csv(input),
        ScoreFormat::Jsonl => read_jsonl(input),
    }
}

pub fn read_scores(path: impl AsRef<Path>, format: ScoreFormat) -> Result<Vec<ScoreRow>> {
    read_scores_from(File::open(path)?, format)
}
