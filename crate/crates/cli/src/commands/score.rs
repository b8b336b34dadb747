use anyhow::Result;
use majorscore::dataset::{join_samples, write_scores};
use majorscore::embedding::ConsistencyLabel;
use majorscore::metrics::{
    score_samples, AggregationKind, ModalityPair, ScoreMethod, ScoringOptions,
};

use super::{load_embeddings, score_format, usage, Outcome};
use crate::run_manifest::{sidecar_path, RunManifest};
use crate::{AggArg, LabelArg, OnOff, ScoreArgs};

pub fn run(args: ScoreArgs) -> Result<Outcome> {
    let pairs = ModalityPair::parse_list(&args.pairs).map_err(|e| usage(e.to_string()))?;
    if pairs.len() != 2 {
        return Err(usage(format!(
            "--pairs needs exactly two pairs, got {}",
            pairs.len()
        )));
    }
    let kinds: Vec<AggregationKind> = match args.agg {
        AggArg::Sum => vec![AggregationKind::Sum],
        AggArg::Prod => vec![AggregationKind::Product],
        AggArg::Avg => vec![AggregationKind::Average],
        AggArg::All => AggregationKind::ALL.to_vec(),
    };
    let label = match args.label {
        LabelArg::Consistent => ConsistencyLabel::Consistent,
        LabelArg::Mispaired => ConsistencyLabel::Mispaired,
        LabelArg::Unknown => ConsistencyLabel::Unknown,
    };
    let options = ScoringOptions {
        pairs,
        abs_mode: args.abs_mode == OnOff::On,
        method: if args.baseline {
            ScoreMethod::Clipclap
        } else {
            ScoreMethod::Majorscore
        },
    };

    let mut manifest = RunManifest::new("score", &args.emb, Vec::new())?;
    let files = args
        .emb
        .iter()
        .map(|p| load_embeddings(p))
        .collect::<Result<Vec<_>>>()?;
    let joined = join_samples(&files)?;
    let samples: Vec<_> = joined
        .samples
        .into_iter()
        .map(|s| s.with_label(label))
        .collect();
    let reports = score_samples(&samples, &options)?;
    let format = score_format(args.format, &args.out);
    write_scores(&reports, &kinds, &args.out, format)?;
    manifest.output(&args.out);

    let outcome = if joined.incomplete.is_empty() {
        Outcome::Success
    } else {
        eprintln!(
            "warning: {} sample(s) skipped for missing modalities",
            joined.incomplete.len()
        );
        for s in &joined.incomplete {
            let missing: Vec<&str> = s.missing.iter().map(|m| m.as_str()).collect();
            manifest
                .skipped
                .push(format!("{}: missing {}", s.id, missing.join(",")));
        }
        Outcome::Partial
    };
    manifest.finish(outcome, &sidecar_path(&args.out))
}
