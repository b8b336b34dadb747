use std::fs;

use anyhow::Result;
use majorscore::dataset::{write_embeddings, EmbeddingFormat};
use majorscore::synthgen::{generate, SynthConfig};

use super::{create_dir, emb_format, usage, Outcome};
use crate::run_manifest::RunManifest;
use crate::SynthArgs;

pub fn run(args: SynthArgs) -> Result<Outcome> {
    let config = SynthConfig {
        n_samples: args.n,
        dim: args.dim,
        divergence: args.divergence,
        noise_scale: args.noise,
        seed: args.seed,
        shared_noise: args.shared_noise,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let mut manifest = RunManifest::new("synth", &[], vec![args.seed])?;
    let out = generate(&config)?;

    create_dir(&args.out_dir)?;
    let format = emb_format(args.format);
    let ext = match format {
        EmbeddingFormat::Emb1 => "emb1",
        EmbeddingFormat::Jsonl => "jsonl",
    };
    for file in out.files() {
        let path = args.out_dir.join(format!("{}.{ext}", file.modality()));
        write_embeddings(file, &path, format)?;
        manifest.output(&path);
    }
    let config_path = args.out_dir.join("synth_config.json");
    fs::write(&config_path, config.to_json_line())?;
    manifest.output(&config_path);
    manifest.finish(Outcome::Success, &args.out_dir.join("run.json"))
}
