use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "varnorm", version, about = "Cluster and normalize noisy word variants")]
pub struct Cli {
    /// Suppress progress messages on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train skip-gram embeddings and write them in word2vec text format.
    Train(TrainCmd),
    /// Build a normalization map and rewrite the corpus.
    Normalize(NormalizeCmd),
    /// Corrupt a clean corpus and write the gold variant map.
    Inject(InjectCmd),
    /// Score a normalization map against a gold map (JSON on stdout).
    Eval(EvalCmd),
    /// Write the synthetic topic corpus used as a test fixture.
    Synth(SynthCmd),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayCmd),
}

/// Corpus input: a file with one document per line, or a directory of
/// `.txt` files with one document each.
#[derive(Debug, Clone, Args, Serialize)]
pub struct CorpusArgs {
    pub corpus: PathBuf,
    /// Keep `#hashtag` prefixes as part of the token.
    #[arg(long)]
    pub keep_hash: bool,
    /// Keep `@mention` prefixes as part of the token.
    #[arg(long)]
    pub keep_at: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    /// Negative samples per positive pair.
    #[arg(long, default_value_t = 5)]
    pub negative: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    /// Minimum word count; by default 1 for small corpora and 5 otherwise.
    #[arg(long)]
    pub min_count: Option<usize>,
    /// Frequent-word subsampling threshold (e.g. 1e-3); off by default.
    #[arg(long)]
    pub sample: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    /// Base seed; every random stream is derived from it.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads. Training with more than one is not reproducible.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
}

#[derive(Debug, Args)]
pub struct TrainCmd {
    #[command(flatten)]
    pub input: CorpusArgs,
    /// Output vector file.
    pub output: PathBuf,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Unsupclean,
    Sridhar,
    Enelvo,
    Ghosh,
}

fn open_unit(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("{x} is not in (0, 1)"))
    }
}

fn half_open_unit(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x <= 1.0 {
        Ok(x)
    } else {
        Err(format!("{x} is not in (0, 1]"))
    }
}

#[derive(Debug, Args)]
pub struct NormalizeCmd {
    #[command(flatten)]
    pub input: CorpusArgs,
    #[arg(long, value_enum, default_value_t = Algorithm::Unsupclean)]
    pub algo: Algorithm,
    /// Directory for map.tsv, clusters.json, normalized.txt and manifest.json.
    #[arg(long, short, default_value = "varnorm-out")]
    pub out_dir: PathBuf,

    /// Pre-trained vectors in word2vec text format.
    #[arg(long, conflicts_with = "train_embeddings")]
    pub embeddings: Option<PathBuf>,
    /// Train vectors on the input corpus first (the default when no
    /// `--embeddings` is given); they are saved as vectors.vec.
    #[arg(long)]
    pub train_embeddings: bool,
    #[command(flatten)]
    pub train: TrainArgs,

    /// Lexical threshold: BLCSR for unsupclean (default 0.56), edit
    /// similarity for ghosh (default 0.7).
    #[arg(long, value_parser = half_open_unit)]
    pub alpha: Option<f64>,
    /// Ghosh pruning fraction of the heaviest edge.
    #[arg(long, default_value_t = 0.6, value_parser = open_unit)]
    pub beta: f64,
    /// Ghosh pruning only applies above this maximum edge weight.
    #[arg(long, default_value_t = 50.0)]
    pub gamma: f64,
    /// Nearest neighbours per clean word (sridhar, enelvo).
    #[arg(long, default_value_t = 25)]
    pub k: usize,
    /// Lexical weight of the enelvo score.
    #[arg(long, default_value_t = 0.8, value_parser = open_unit)]
    pub n: f64,

    /// Only normalize toward these words (one per line).
    #[arg(long, conflicts_with_all = ["clean_words", "freq_threshold"])]
    pub queries: Option<PathBuf>,
    /// List of correctly spelled words (one per line).
    #[arg(long, conflicts_with = "freq_threshold")]
    pub clean_words: Option<PathBuf>,
    /// Treat corpus words at least this frequent as clean.
    #[arg(long)]
    pub freq_threshold: Option<usize>,

    /// Write each unsupclean word graph as an edge list under graphs/.
    #[arg(long)]
    pub dump_graphs: bool,

    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Noise {
    Social,
    Ocr,
}

#[derive(Debug, Args)]
pub struct InjectCmd {
    #[command(flatten)]
    pub input: CorpusArgs,
    /// Noisy corpus output, one document per line.
    pub output: PathBuf,
    /// Gold map output (noisy<TAB>clean).
    pub gold: PathBuf,
    #[arg(long, value_enum, default_value_t = Noise::Social)]
    pub kind: Noise,
    /// Per-token corruption probability.
    #[arg(long, default_value_t = 0.15)]
    pub rate: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvalCmd {
    /// Predicted map TSV.
    pub map: PathBuf,
    /// Gold map TSV.
    pub gold: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    /// Clean corpus output, one document per line.
    pub output: PathBuf,
    /// Also write the clean vocabulary, one word per line.
    #[arg(long)]
    pub vocabulary: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub docs: usize,
    #[arg(long, default_value_t = 200)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 10)]
    pub topics: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReplayCmd {
    pub manifest: PathBuf,
}
