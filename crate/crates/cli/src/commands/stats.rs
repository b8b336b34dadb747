use anyhow::{Context, Result};
use majorscore::dataset::{read_scores, ScoreFormat};
use majorscore::stats::{summarize, TTestVariant};

use super::{write_json, Outcome};
use crate::run_manifest::{sidecar_path, RunManifest};
use crate::{StatsArgs, VariantArg};

pub fn run(args: StatsArgs) -> Result<Outcome> {
    let manifest = RunManifest::new("stats", std::slice::from_ref(&args.scores), Vec::new())?;
    let rows = read_scores(&args.scores, ScoreFormat::from_path(&args.scores))
        .with_context(|| format!("reading {}", args.scores.display()))?;
    let first: Vec<f64> = rows.iter().map(|r| r.s_vt).collect();
    let second: Vec<f64> = rows.iter().map(|r| r.s_ta).collect();
    let variant = match args.variant {
        VariantArg::Paired => TTestVariant::Paired,
        VariantArg::Welch => TTestVariant::Welch,
    };
    let summary = summarize(&first, &second, variant).context("s_vt vs s_ta")?;
    write_json(&args.out, &summary)?;
    let mut manifest = manifest;
    manifest.output(&args.out);
    manifest.finish(Outcome::Success, &sidecar_path(&args.out))
}
