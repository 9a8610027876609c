use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use holo_embed::analysis::{DEFAULT_K, DEFAULT_SAMPLE_SIZE, DEFAULT_THRESHOLD};
use holo_embed::codebook::{DEFAULT_DIMENSION, DEFAULT_SEED};

mod commands;

/// Holographically compressed word embeddings: build label codebooks,
/// compress annotated vocabularies, decode them and analyze the result.
#[derive(Parser, Debug)]
#[command(name = "holo-embed", author, version, about, long_about = None)]
struct Cli {
    /// Cap on worker threads (defaults to one per core). Outputs do not
    /// depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the seeded label vectors and write them as a codebook file.
    BuildCodebook(BuildCodebookArgs),
    /// Compress an annotated corpus into a keyed vocabulary file plus a
    /// JSON metadata sidecar.
    Compress(CompressArgs),
    /// Recover POS tags and NER types from a compressed vocabulary.
    Decode(DecodeArgs),
    /// Orthogonality and neighborhood reports.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Synthetic round trip checked against the regression floors.
    SelfTest(SelfTestArgs),
}

#[derive(Args, Debug)]
struct BuildCodebookArgs {
    /// Where to write the codebook (JSON).
    output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DIMENSION)]
    dim: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// POS tag list, one per line (default: the shipped 50-tag list).
    #[arg(long, value_name = "FILE")]
    pos_tags: Option<PathBuf>,
    /// NER type list, one per line (default: the shipped 19-type list).
    #[arg(long, value_name = "FILE")]
    ner_types: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompressArgs {
    codebook: PathBuf,
    /// GloVe-format text embeddings.
    embeddings: PathBuf,
    /// Tab-separated `surface  pos  ner-or-"-"` lines.
    annotations: PathBuf,
    /// Output vocabulary, GloVe format keyed by composite key.
    output: PathBuf,
    /// Metadata sidecar path [default: <OUTPUT>.meta.json]
    #[arg(long, value_name = "FILE")]
    meta: Option<PathBuf>,
    /// Scale each compressed vector to unit length.
    #[arg(long)]
    unit_norm: bool,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    codebook: PathBuf,
    vocabulary: PathBuf,
    /// Per-key decode report (JSON).
    output: PathBuf,
    /// Metadata sidecar [default: <VOCABULARY>.meta.json if it exists].
    /// Without one, component counts are inferred and no accuracy is
    /// reported.
    #[arg(long, value_name = "FILE")]
    meta: Option<PathBuf>,
    /// Also decode token identity against this GloVe-format table.
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum AnalyzeCommand {
    /// Sampled |cosine| statistics over two disjoint random samples.
    Orthogonality(OrthogonalityArgs),
    /// Compare top-k neighborhoods between the original and compressed
    /// spaces.
    Neighborhoods(NeighborhoodArgs),
}

#[derive(Args, Debug)]
struct OrthogonalityArgs {
    vocabulary: PathBuf,
    output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_SIZE)]
    sample_size: usize,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args, Debug)]
struct NeighborhoodArgs {
    /// Original GloVe-format embeddings.
    embeddings: PathBuf,
    /// Compressed vocabulary; its metadata sidecar is required.
    vocabulary: PathBuf,
    /// Core words, one per line.
    cores: PathBuf,
    output: PathBuf,
    #[arg(long, value_name = "FILE")]
    meta: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
}

#[derive(Args, Debug)]
struct SelfTestArgs {
    #[arg(long, default_value_t = DEFAULT_DIMENSION)]
    dim: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Synthetic embedding table size.
    #[arg(long, default_value_t = 1000)]
    words: usize,
    /// Synthetic corpus length.
    #[arg(long, default_value_t = 1000)]
    tokens: usize,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_SIZE)]
    sample_size: usize,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Keep the generated artifacts in this directory.
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        anyhow::ensure!(n > 0, "--threads must be at least 1");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::BuildCodebook(a) => commands::build_codebook(a).map(|_| true),
        Command::Compress(a) => commands::compress(a).map(|_| true),
        Command::Decode(a) => commands::decode(a).map(|_| true),
        Command::Analyze(AnalyzeCommand::Orthogonality(a)) => commands::orthogonality(a).map(|_| true),
        Command::Analyze(AnalyzeCommand::Neighborhoods(a)) => commands::neighborhoods(a).map(|_| true),
        Command::SelfTest(a) => self_test::run(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
