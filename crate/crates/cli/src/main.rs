//! `gec`: build vocabularies, generate training data, train the five
//! error-type classifiers, correct text and score the output.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gec_core::classifier::DEFAULT_SEED;
use gec_core::corpus::DEFAULT_CAPACITY;
use gec_core::linguistics::ErrorType;

/// Failure caused by bad flags or unusable input. Exits with status 2;
/// anything else exits with 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct InputError(pub String);

macro_rules! input_error {
    ($($arg:tt)*) => {
        anyhow::Error::new($crate::InputError(format!($($arg)*)))
    };
}
pub(crate) use input_error;

#[derive(Parser, Debug)]
#[command(
    name = "gec",
    version,
    about = "Classifier-based grammatical error correction"
)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Only print errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count tokens in plain-text corpora and keep the most frequent words.
    BuildVocab(BuildVocabArgs),
    /// Extract labeled examples for one error type from a corpus.
    Generate(GenerateArgs),
    /// Train one error-type classifier on a generated dataset.
    Train(TrainArgs),
    /// Correct text with trained classifiers.
    Correct(CorrectArgs),
    /// Score corrections against gold edits (precision, recall, F0.5).
    Evaluate(EvaluateArgs),
    /// Run the whole workflow on a generated toy corpus.
    Demo(DemoArgs),
}

#[derive(Args, Debug)]
pub struct BuildVocabArgs {
    /// Corpus files, one sentence per line.
    #[arg(required = true)]
    pub corpus: Vec<PathBuf>,
    /// Number of words kept, not counting the special tokens.
    #[arg(long, default_value_t = DEFAULT_CAPACITY)]
    pub capacity: usize,
    /// Output vocabulary file.
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Corpus files: plain text, or token<TAB>tag blocks with --tagged.
    #[arg(required = true)]
    pub corpus: Vec<PathBuf>,
    /// Vocabulary file from build-vocab.
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(short = 't', long, value_parser = parse_error_type)]
    pub error_type: ErrorType,
    /// Output dataset file.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Read pre-tagged input instead of running the built-in tagger.
    #[arg(long)]
    pub tagged: bool,
    /// Cap the majority class at this multiple of the other classes
    /// combined [default: 2.0 for article, no cap otherwise].
    #[arg(long, conflicts_with = "no_balance")]
    pub majority_ratio: Option<f64>,
    /// Keep every example, even for article.
    #[arg(long)]
    pub no_balance: bool,
    /// Sentences per balancing shard.
    #[arg(long, default_value_t = 1000)]
    pub shard_size: usize,
    /// Seed for balancing.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OptimizerChoice {
    Sgd,
    Adam,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training dataset from generate.
    #[arg(long)]
    pub dataset: PathBuf,
    /// The vocabulary the dataset was generated with.
    #[arg(long)]
    pub vocab: PathBuf,
    /// Output checkpoint.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Must match the dataset [default: the dataset's type].
    #[arg(short = 't', long, value_parser = parse_error_type)]
    pub error_type: Option<ErrorType>,
    /// Separate validation dataset. Without it a slice of the training
    /// data is held out.
    #[arg(long)]
    pub validation: Option<PathBuf>,
    /// Share of the training data held out when --validation is absent.
    #[arg(long, default_value_t = 0.1)]
    pub validation_fraction: f64,
    /// Per-epoch metrics as JSON lines [default: <out>.metrics.jsonl].
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// [default: sgd for article, preposition, subj-agreement; adam for
    /// verb-form, noun-number]
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerChoice>,
    /// [default: 0.08 with sgd, 0.001 with adam]
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// GRU hidden size [default: 128 for article and preposition, 256
    /// otherwise].
    #[arg(long)]
    pub gru_hidden: Option<usize>,
    #[arg(long, default_value_t = 300)]
    pub embedding_dim: usize,
    #[arg(long, default_value_t = 512)]
    pub mlp_hidden: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    /// Epochs without validation improvement before stopping; 0 never stops.
    #[arg(long, default_value_t = 3)]
    pub patience: usize,
    /// Correction threshold stored in the checkpoint [default: 0.85 for
    /// preposition, 0.9 otherwise].
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Global gradient norm limit.
    #[arg(long, default_value_t = 5.0, conflicts_with = "no_clip")]
    pub clip_norm: f64,
    /// Disable gradient clipping.
    #[arg(long)]
    pub no_clip: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Args, Debug)]
pub struct CorrectArgs {
    /// Input text, one sentence per line ("-" for stdin).
    pub input: PathBuf,
    /// Vocabulary the models were trained with.
    #[arg(long)]
    pub vocab: PathBuf,
    /// Directory holding <type>.gecm checkpoints.
    #[arg(long)]
    pub model_dir: Option<PathBuf>,
    /// Checkpoint for one type, as TYPE=PATH. Overrides --model-dir.
    #[arg(long = "model", value_parser = parse_model_path)]
    pub models: Vec<(ErrorType, PathBuf)>,
    /// Run only these types (comma separated) [default: all five].
    #[arg(long, value_delimiter = ',', value_parser = parse_error_type)]
    pub types: Vec<ErrorType>,
    /// Override one type's threshold, as TYPE=VALUE [default: the
    /// checkpoint's threshold, 0.85 for preposition and 0.9 otherwise].
    #[arg(long = "threshold", value_parser = parse_threshold)]
    pub thresholds: Vec<(ErrorType, f64)>,
    /// Corrected text [default: stdout].
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Write the applied edits here.
    #[arg(long)]
    pub edits_out: Option<PathBuf>,
    /// Print changed sentences as -original/+corrected pairs on stdout.
    #[arg(long)]
    pub diff: bool,
    /// Input is token<TAB>tag blocks.
    #[arg(long)]
    pub tagged: bool,
    /// Accept checkpoints built with a different vocabulary.
    #[arg(long)]
    pub allow_vocab_mismatch: bool,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("system").required(true).args(["corrected", "edits"])))]
pub struct EvaluateArgs {
    /// Gold annotations: `S tokens` lines followed by
    /// `A start end|||type|||replacement` lines.
    #[arg(long)]
    pub gold: PathBuf,
    /// Corrected sentences, one per line, tokenized.
    #[arg(long)]
    pub corrected: Option<PathBuf>,
    /// Edits file written by `correct --edits-out`.
    #[arg(long)]
    pub edits: Option<PathBuf>,
    /// Original sentences [default: the gold S lines].
    #[arg(long)]
    pub original: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    /// Toy sentences used for training.
    #[arg(long, default_value_t = 2000)]
    pub sentences: usize,
    /// Held-out sentences to corrupt and correct.
    #[arg(long, default_value_t = 200)]
    pub held_out: usize,
    #[arg(long, default_value_t = 15)]
    pub epochs: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Keep every intermediate file here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

fn parse_error_type(s: &str) -> Result<ErrorType, String> {
    s.parse()
        .map_err(|e| format!("{e}; expected one of {}", type_names()))
}

fn type_names() -> String {
    ErrorType::ALL.map(|t| t.name()).join(", ")
}

fn split_pair(s: &str) -> Result<(ErrorType, &str), String> {
    let (t, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected TYPE=VALUE, got {s:?}"))?;
    Ok((parse_error_type(t)?, v))
}

fn parse_threshold(s: &str) -> Result<(ErrorType, f64), String> {
    let (t, v) = split_pair(s)?;
    let v: f64 = v.parse().map_err(|_| format!("bad threshold {v:?}"))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(format!("threshold {v} outside [0, 1]"));
    }
    Ok((t, v))
}

fn parse_model_path(s: &str) -> Result<(ErrorType, PathBuf), String> {
    let (t, p) = split_pair(s)?;
    Ok((t, PathBuf::from(p)))
}

/// Output closed early, as with `gec correct ... | head`.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<std::io::Error>())
        .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        (false, _) => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::BuildVocab(a) => commands::build_vocab(a),
        Command::Generate(a) => commands::generate(a),
        Command::Train(a) => commands::train(a),
        Command::Correct(a) => commands::correct(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Demo(a) => commands::demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<InputError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
