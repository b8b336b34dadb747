use std::fs::File;

use anyhow::{Context, Result};
use majorscore::dataset::{
    read_embeddings, read_scores, write_embeddings, write_score_rows, EmbeddingFormat, ScoreFormat,
};

use super::Outcome;
use crate::run_manifest::{sidecar_path, RunManifest};
use crate::{ConvertArgs, KindArg};

/// Formats follow the file extensions.
pub fn run(args: ConvertArgs) -> Result<Outcome> {
    let mut manifest = RunManifest::new("convert", std::slice::from_ref(&args.input), Vec::new())?;
    let context = || format!("converting {}", args.input.display());
    match args.kind {
        KindArg::Embeddings => {
            let file = read_embeddings(&args.input, EmbeddingFormat::from_path(&args.input))
                .with_context(context)?;
            write_embeddings(
                &file,
                &args.output,
                EmbeddingFormat::from_path(&args.output),
            )?;
        }
        KindArg::Scores => {
            let rows = read_scores(&args.input, ScoreFormat::from_path(&args.input))
                .with_context(context)?;
            write_score_rows(
                &rows,
                File::create(&args.output)?,
                ScoreFormat::from_path(&args.output),
            )?;
        }
    }
    manifest.output(&args.output);
    manifest.finish(Outcome::Success, &sidecar_path(&args.output))
}
