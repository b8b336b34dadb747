use std::collections::HashSet;

use anyhow::Result;
use majorscore::dataset::{
    join_samples, mispair, write_embeddings, EmbeddingFile, EmbeddingFormat, EmbeddingRecord,
};
use majorscore::embedding::ModalityId;

use super::{create_dir, load_embeddings, usage, write_json, Outcome};
use crate::run_manifest::RunManifest;
use crate::MispairArgs;

/// Rewrites every input into `--out-dir` under its own file name, restricted
/// to complete samples, with the chosen modality deranged.
pub fn run(args: MispairArgs) -> Result<Outcome> {
    let modality = ModalityId::new(args.modality.clone()).map_err(|e| usage(e.to_string()))?;
    let mut names = HashSet::new();
    for p in &args.emb {
        let name = p
            .file_name()
            .ok_or_else(|| usage(format!("{} has no file name", p.display())))?;
        if !names.insert(name.to_owned()) {
            return Err(usage(format!("two inputs share the file name {name:?}")));
        }
    }

    let mut manifest = RunManifest::new("mispair", &args.emb, vec![args.seed])?;
    let files = args
        .emb
        .iter()
        .map(|p| load_embeddings(p))
        .collect::<Result<Vec<_>>>()?;
    if !files.iter().any(|f| *f.modality() == modality) {
        return Err(usage(format!("no input holds {modality} embeddings")));
    }
    let joined = join_samples(&files)?;
    let (swapped, plan) = mispair(&joined.samples, &modality, args.seed)?;

    create_dir(&args.out_dir)?;
    for (input, path) in files.iter().zip(&args.emb) {
        let records = swapped
            .iter()
            .map(|s| EmbeddingRecord {
                id: s.id().to_owned(),
                values: s
                    .get(input.modality())
                    .expect("joined sample")
                    .values()
                    .to_vec(),
            })
            .collect();
        let out = EmbeddingFile::new(
            input.modality().clone(),
            input.space().clone(),
            input.dim(),
            records,
        )?;
        let target = args.out_dir.join(path.file_name().expect("checked above"));
        write_embeddings(&out, &target, EmbeddingFormat::from_path(path))?;
        manifest.output(&target);
    }
    let plan_path = args.out_dir.join("pairing_plan.json");
    write_json(&plan_path, &plan)?;
    manifest.output(&plan_path);

    let outcome = if joined.incomplete.is_empty() {
        Outcome::Success
    } else {
        eprintln!(
            "warning: {} sample(s) skipped for missing modalities",
            joined.incomplete.len()
        );
        manifest.skipped.extend(
            joined
                .incomplete
                .iter()
                .map(|s| format!("{}: incomplete", s.id)),
        );
        Outcome::Partial
    };
    manifest.finish(outcome, &args.out_dir.join("run.json"))
}
