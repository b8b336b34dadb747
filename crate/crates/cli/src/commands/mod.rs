use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use majorscore::dataset::{read_embeddings, EmbeddingFile, EmbeddingFormat, ScoreFormat};
use serde::Serialize;

use crate::{Command, EmbFormatArg, ScoreFormatArg};

mod compare;
mod convert;
mod embed;
mod mispair;
mod score;
mod stats;
mod synth;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Output was written but some inputs were skipped.
    Partial,
}

impl Outcome {
    pub fn status(self) -> &'static str {
        match self {
            Self::Success => "success",
            Self::Partial => "partial",
        }
    }
}

/// Bad flag values found after parsing; exits with the usage code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

pub fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Score(args) => score::run(args),
        Command::Stats(args) => stats::run(args),
        Command::Mispair(args) => mispair::run(args),
        Command::Synth(args) => synth::run(args),
        Command::Convert(args) => convert::run(args),
        Command::Embed(args) => embed::run(args),
        Command::Compare(args) => compare::run(args),
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingFile> {
    read_embeddings(path, EmbeddingFormat::from_path(path))
        .with_context(|| format!("reading {}", path.display()))
}

pub fn emb_format(arg: EmbFormatArg) -> EmbeddingFormat {
    match arg {
        EmbFormatArg::Emb1 => EmbeddingFormat::Emb1,
        EmbFormatArg::Jsonl => EmbeddingFormat::Jsonl,
    }
}

pub fn score_format(arg: Option<ScoreFormatArg>, path: &Path) -> ScoreFormat {
    match arg {
        Some(ScoreFormatArg::Csv) => ScoreFormat::Csv,
        Some(ScoreFormatArg::Jsonl) => ScoreFormat::Jsonl,
        None => ScoreFormat::from_path(path),
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
