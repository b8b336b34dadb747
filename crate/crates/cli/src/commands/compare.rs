use std::path::PathBuf;

use anyhow::{Context, Result};
use majorscore::dataset::{read_scores, ScoreFormat, ScoreRow};
use majorscore::metrics::ScoreMethod;
use majorscore::report::{build_report, ComparisonInputs, Condition};
use majorscore::stats::TTestVariant;

use super::{usage, write_json, Outcome};
use crate::run_manifest::{sidecar_path, RunManifest};
use crate::{CompareArgs, VariantArg};

fn load(path: &Option<PathBuf>) -> Result<Option<Vec<ScoreRow>>> {
    path.as_ref()
        .map(|p| {
            read_scores(p, ScoreFormat::from_path(p))
                .with_context(|| format!("reading {}", p.display()))
        })
        .transpose()
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| usage(format!("--range expects lo,hi, got {s:?}")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("--range: {v:?} is not a number")))
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(usage(format!("--range needs lo < hi, got {lo},{hi}")));
    }
    Ok((lo, hi))
}

fn show(value: Option<f64>) -> String {
    value.map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"))
}

pub fn run(args: CompareArgs) -> Result<Outcome> {
    if args.bins == 0 {
        return Err(usage("--bins must be at least 1"));
    }
    let range = args.range.as_deref().map(parse_range).transpose()?;
    let paths: Vec<PathBuf> = [
        &args.consistent,
        &args.mispaired,
        &args.baseline_consistent,
        &args.baseline_mispaired,
    ]
    .into_iter()
    .flatten()
    .cloned()
    .collect();
    if paths.is_empty() {
        return Err(usage("give at least one of --consistent, --mispaired, --baseline-consistent, --baseline-mispaired"));
    }
    let mut manifest = RunManifest::new("compare", &paths, Vec::new())?;

    let consistent = load(&args.consistent)?;
    let mispaired = load(&args.mispaired)?;
    let baseline_consistent = load(&args.baseline_consistent)?;
    let baseline_mispaired = load(&args.baseline_mispaired)?;
    let inputs = ComparisonInputs {
        majorscore_consistent: consistent.as_deref(),
        majorscore_mispaired: mispaired.as_deref(),
        clipclap_consistent: baseline_consistent.as_deref(),
        clipclap_mispaired: baseline_mispaired.as_deref(),
    };
    let variant = match args.variant {
        VariantArg::Paired => TTestVariant::Paired,
        VariantArg::Welch => TTestVariant::Welch,
    };
    let report = build_report(&inputs, variant, args.bins, range)?;
    write_json(&args.out, &report)?;
    manifest.output(&args.out);

    println!(
        "{:<11} {:<11} {:>6} {:>9} {:>9} {:>9} {:>9}",
        "condition", "method", "n", "cohens_d", "t", "mean_avg", "fair"
    );
    for condition in Condition::ALL {
        for method in [ScoreMethod::Majorscore, ScoreMethod::Clipclap] {
            if let Some(cell) = report.comparison.cell(condition, method) {
                println!(
                    "{:<11} {:<11} {:>6} {:>9} {:>9} {:>9} {:>9}",
                    format!("{condition:?}").to_lowercase(),
                    format!("{method:?}").to_lowercase(),
                    cell.n,
                    show(cell.stats.cohens_d.value()),
                    show(cell.stats.t_value.value()),
                    show(cell.composite.avg.map(|m| m.mean)),
                    show(Some(cell.fair_score.mean)),
                );
            }
        }
    }
    manifest.finish(Outcome::Success, &sidecar_path(&args.out))
}
