use std::fs;
use std::time::Duration;

use anyhow::{Context, Result};
use majorscore::dataset::{write_embeddings, EmbeddingFormat};
use majorscore::embedding::{ModalityId, Pooling};
use majorscore::inference_client::{ClientConfig, EmbedClient, Manifest};

use super::{usage, write_json, Outcome};
use crate::run_manifest::{sidecar_path, RunManifest};
use crate::{EmbedArgs, PoolingArg};

pub fn run(args: EmbedArgs) -> Result<Outcome> {
    let modality = ModalityId::new(args.modality.clone()).map_err(|e| usage(e.to_string()))?;
    if args.parallelism == 0 {
        return Err(usage("--parallelism must be at least 1"));
    }
    if !(args.timeout.is_finite() && args.timeout > 0.0) {
        return Err(usage("--timeout must be a positive number of seconds"));
    }
    let pooling = match args.pooling {
        PoolingArg::Renormalized => Pooling::MeanRenormalized,
        PoolingArg::Mean => Pooling::Mean,
    };

    let mut manifest = RunManifest::new("embed", std::slice::from_ref(&args.manifest), Vec::new())?;
    let text = fs::read_to_string(&args.manifest)
        .with_context(|| format!("reading {}", args.manifest.display()))?;
    let items = Manifest::from_jsonl(modality, args.model.clone(), &text)?;
    let client = EmbedClient::new(
        &args.server,
        ClientConfig {
            timeout: Duration::from_secs_f64(args.timeout),
            max_retries: args.retries,
            initial_backoff: Duration::from_millis(100),
            bearer_token: args.token.clone(),
        },
    )?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    let result = runtime.block_on(client.embed_manifest(&items, args.parallelism, pooling))?;

    write_embeddings(
        &result.file,
        &args.out,
        EmbeddingFormat::from_path(&args.out),
    )?;
    manifest.output(&args.out);
    let mut failures_path = args.out.clone().into_os_string();
    failures_path.push(".failures.json");
    let failures_path = std::path::PathBuf::from(failures_path);
    write_json(&failures_path, &result.failures)?;
    manifest.output(&failures_path);

    let outcome = if result.failures.is_empty() {
        Outcome::Success
    } else {
        eprintln!(
            "warning: {} of the manifest ids failed",
            result.failures.len()
        );
        manifest.skipped.extend(
            result
                .failures
                .iter()
                .map(|f| format!("{}: {}", f.id, f.error)),
        );
        Outcome::Partial
    };
    manifest.finish(outcome, &sidecar_path(&args.out))
}
