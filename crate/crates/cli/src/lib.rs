//! Command-line front end for the overlap measurement toolkit.
//!
//! Seven subcommands wire the library stages together: `index` builds
//! on-disk corpus indexes, `parse` exports instance skeletons, `score`
//! computes per-instance overlap records, `partition` splits a test set at
//! one cutoff, `analyze` produces the full cutoff/accuracy/significance
//! report, `curve` plots overlap proportion against cutoff, and `pipeline`
//! constructs new instances from raw comment dumps.
//!
//! Conventions shared by every command:
//!
//! - exit code 0 on success, 1 on a usage error, 2 on a data error;
//! - outputs are written atomically (temp file + rename) and a
//!   `run_manifest.txt` (settings, input digests, tool version) accompanies
//!   every output;
//! - progress and warnings go to standard error, data only to standard
//!   output or files;
//! - no command mutates its inputs, and the same configuration over the
//!   same inputs produces byte-identical outputs.

mod commands;
mod config;
mod jsonl;
mod manifest;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::ConfigMap;

pub use report::emit_report;

/// Tool version recorded in every run manifest.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failure classes, mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// The invocation itself is wrong (missing/invalid flags or config
    /// keys). Exit code 1.
    Usage(String),
    /// The inputs cannot be read or do not hold what they should.
    /// Exit code 2.
    Data(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError::Data(message.into())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "overlap",
    version,
    about = "Measure sentence-level overlap between text corpora and pronoun-resolution test sets",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    /// Optional key=value file supplying defaults for any flag below;
    /// explicit flags always win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Bound internal parallelism to this many threads. Never changes
    /// output bytes, only speed.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a positional index over a corpus and persist it to a directory.
    Index(IndexArgs),
    /// Parse labeled instances into retrieval skeletons (audit export).
    Parse(ParseArgs),
    /// Score instances against one or more indexes (overlap records).
    Score(ScoreArgs),
    /// Split scored instances into overlap / non-overlap id lists at one cutoff.
    Partition(PartitionArgs),
    /// Partition at several cutoffs, measure subset accuracies, and test significance.
    Analyze(AnalyzeArgs),
    /// Emit the overlap-proportion curve over a cutoff grid (CSV + SVG).
    Curve(CurveArgs),
    /// Construct new test instances from a raw comment dump.
    Pipeline(PipelineArgs),
}

/// How the corpus file passed to `index --corpus` is interpreted.
#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusFormat {
    /// Running prose; the file is split into sentences.
    Text,
    /// One pre-split sentence per line; blank lines are skipped.
    Lines,
    /// One JSON object per line with a string `body` (and optional string
    /// `id`); each body is split into sentences.
    Jsonl,
}

impl CorpusFormat {
    fn parse(value: &str) -> Result<Self, CliError> {
        match value {
            "text" => Ok(CorpusFormat::Text),
            "lines" => Ok(CorpusFormat::Lines),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(CliError::usage(format!(
                "format must be text, lines, or jsonl, got {other:?}"
            ))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            CorpusFormat::Text => "text",
            CorpusFormat::Lines => "lines",
            CorpusFormat::Jsonl => "jsonl",
        }
    }
}

#[derive(Args, Debug)]
struct IndexArgs {
    /// Corpus file to index.
    #[arg(long, value_name = "FILE")]
    corpus: Option<PathBuf>,

    /// Corpus file layout: text, lines, or jsonl.
    #[arg(long, value_enum)]
    format: Option<CorpusFormat>,

    /// Corpus name stored in the index and used to break ranking ties;
    /// defaults to the corpus file stem.
    #[arg(long, value_name = "NAME")]
    name: Option<String>,

    /// Directory the index is written into.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ParseArgs {
    /// Labeled instances, one JSON object per line
    /// ({id, sentence, span1, span2, pronoun, answer}).
    #[arg(long, value_name = "FILE")]
    instances: Option<PathBuf>,

    /// Connective lexicon file (one lowercase term per line); defaults to
    /// the bundled lexicon.
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,

    /// Output file: one skeleton JSON object per input instance.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    /// Labeled instances, one JSON object per line.
    #[arg(long, value_name = "FILE")]
    instances: Option<PathBuf>,

    /// Index directory to search; repeat the flag to search several corpora.
    #[arg(long = "index", value_name = "DIR")]
    index: Vec<PathBuf>,

    /// Term-frequency saturation parameter.
    #[arg(long, value_name = "F64")]
    k1: Option<f64>,

    /// Length-normalization parameter in [0, 1].
    #[arg(long, value_name = "F64")]
    b: Option<f64>,

    /// Lower bound applied to per-term IDF; pass -inf for the unfloored
    /// formula.
    #[arg(long, value_name = "F64")]
    idf_floor: Option<f64>,

    /// Maximum tokens allowed strictly between the two required phrases.
    #[arg(long, value_name = "N")]
    window: Option<usize>,

    /// Also write the top-ranked matches per instance to this file.
    #[arg(long, value_name = "FILE")]
    matches: Option<PathBuf>,

    /// Matches kept per instance in the --matches file.
    #[arg(long, value_name = "N", requires = "matches")]
    top_k: Option<usize>,

    /// Connective lexicon file; defaults to the bundled lexicon.
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,

    /// Output file: one overlap record JSON object per input instance.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    /// Overlap records produced by `score`, one JSON object per line.
    #[arg(long, value_name = "FILE")]
    scores: Option<PathBuf>,

    /// Score cutoff; an instance overlaps when its score strictly exceeds it.
    #[arg(long, value_name = "F64")]
    cutoff: Option<f64>,

    /// Directory receiving overlap.txt and nonoverlap.txt id lists.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Labeled instances, one JSON object per line (gold answers).
    #[arg(long, value_name = "FILE")]
    instances: Option<PathBuf>,

    /// Overlap records produced by `score`.
    #[arg(long, value_name = "FILE")]
    scores: Option<PathBuf>,

    /// Prediction file (tab-separated instance_id, answer; model name = file
    /// stem) or a directory of .tsv prediction files; repeatable.
    #[arg(long = "predictions", value_name = "PATH")]
    predictions: Vec<PathBuf>,

    /// Comma-separated ascending score cutoffs (default 0,25,35).
    #[arg(long, value_name = "LIST")]
    cutoffs: Option<String>,

    /// Apply the continuity correction to the chi-squared statistic.
    #[arg(long)]
    yates: bool,

    /// Curve grid: start:step:end or a comma-separated ascending list
    /// (default 0:2.5:60).
    #[arg(long, value_name = "GRID")]
    grid: Option<String>,

    /// Directory receiving tables.csv, tables.txt, curve.csv, curve.svg.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CurveArgs {
    /// Overlap records produced by `score`.
    #[arg(long, value_name = "FILE")]
    scores: Option<PathBuf>,

    /// Curve grid: start:step:end or a comma-separated ascending list
    /// (default 0:2.5:60).
    #[arg(long, value_name = "GRID")]
    grid: Option<String>,

    /// Directory receiving curve.csv and curve.svg.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    /// Comment dump: one JSON object per line with a string `body` and an
    /// optional string `id`.
    #[arg(long, value_name = "FILE")]
    dump: Option<PathBuf>,

    /// Completed annotation labels (tab-separated instance_id, annotator_id,
    /// label); when given, the final dataset is assembled.
    #[arg(long, value_name = "FILE")]
    labels: Option<PathBuf>,

    /// Connective lexicon file; defaults to the bundled lexicon.
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,

    /// Male given-name pool (one name per line); defaults to the bundled pool.
    #[arg(long, value_name = "FILE")]
    male_names: Option<PathBuf>,

    /// Female given-name pool (one name per line); defaults to the bundled
    /// pool.
    #[arg(long, value_name = "FILE")]
    female_names: Option<PathBuf>,

    /// Global perturbation seed; per-instance randomness is derived from it
    /// and the instance's source reference.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Shortest sentence kept, in tokens.
    #[arg(long, value_name = "N")]
    min_tokens: Option<usize>,

    /// Longest sentence kept, in tokens.
    #[arg(long, value_name = "N")]
    max_tokens: Option<usize>,

    /// Directory receiving the stage files, funnel stats, annotation tasks,
    /// and (with --labels) the final dataset.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

/// Parse `argv` (including the program name) and run the named command.
/// Returns the process exit code: 0 success, 1 usage error, 2 data error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let requested_info = matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if requested_info { 0 } else { 1 };
        }
    };

    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(message)) => {
            eprintln!("usage error: {message}");
            1
        }
        Err(CliError::Data(message)) => {
            eprintln!("error: {message}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => ConfigMap::load(path)?,
        None => ConfigMap::default(),
    };
    let mut threads = cli.threads;
    config::fill_parse(&mut threads, &cfg, "threads")?;

    match cli.command {
        Command::Index(args) => commands::index(args, &cfg),
        Command::Parse(args) => commands::parse(args, &cfg),
        Command::Score(args) => commands::score(args, &cfg, threads),
        Command::Partition(args) => commands::partition(args, &cfg),
        Command::Analyze(args) => commands::analyze(args, &cfg),
        Command::Curve(args) => commands::curve(args, &cfg),
        Command::Pipeline(args) => commands::pipeline(args, &cfg),
    }
}
