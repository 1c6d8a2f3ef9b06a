//! `aspectag`: ingest review corpora, train and cross-validate taggers,
//! evaluate, predict and build domain-adapted corpora.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{ModelFlags, TrainFlags};

#[derive(Parser, Debug)]
#[command(name = "aspectag", version, about = "Aspect extraction and sentiment sequence taggers")]
pub struct Cli {
    /// Directory under which each run creates its own output directory.
    #[arg(long, global = true, env = "ASPECTAG_OUTPUT_ROOT", default_value = output::DEFAULT_ROOT)]
    pub out_root: PathBuf,
    /// Name of the run directory (defaults to the command name).
    #[arg(long, global = true)]
    pub name: Option<String>,
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    SemevalXml,
    Brat,
    Canonical,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convert a corpus to canonical JSON lines and print its statistics.
    Ingest {
        #[arg(long, value_enum)]
        format: Format,
        /// One file, or the `.txt` and `.ann` pair for brat.
        #[arg(required = true, num_args = 1..=2)]
        inputs: Vec<PathBuf>,
    },
    /// Print statistics of canonical corpora.
    Stats {
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Train one model.
    Train {
        #[arg(long)]
        train: PathBuf,
        /// Validation corpus; without it a share of --train is held out.
        #[arg(long)]
        dev: Option<PathBuf>,
        /// Corpus scored once with the selected model.
        #[arg(long)]
        test: Option<PathBuf>,
        #[command(flatten)]
        model: ModelFlags,
        #[command(flatten)]
        training: TrainFlags,
    },
    /// k-fold cross-validation, or a significance table for two finished runs.
    Crossval {
        #[arg(long, required_unless_present = "compare")]
        corpus: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        /// Folds trained in parallel.
        #[arg(long)]
        jobs: Option<usize>,
        /// Source corpus added to every training fold (WEIGHTED adaptation).
        #[arg(long)]
        src: Option<PathBuf>,
        /// Embedding scale for --src sentences.
        #[arg(long, requires = "src")]
        weight: Option<f64>,
        /// Two crossval run directories to compare with t-tests.
        #[arg(long, num_args = 2, value_names = ["RUN_A", "RUN_B"], conflicts_with = "corpus")]
        compare: Option<Vec<PathBuf>>,
        #[command(flatten)]
        model: ModelFlags,
        #[command(flatten)]
        training: TrainFlags,
    },
    /// Score a checkpoint on a corpus.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Write `token<TAB>gold<TAB>predicted` lines (conlleval input).
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Print to standard output instead of the run directory.
        #[arg(long)]
        stdout: bool,
    },
    /// Build a domain-adapted training corpus.
    Adapt {
        /// weighted | pred
        #[arg(long)]
        method: String,
        #[arg(long)]
        tgt: PathBuf,
        /// Source corpus (weighted).
        #[arg(long)]
        src: Option<PathBuf>,
        /// Source-domain checkpoint trained in ae mode (pred).
        #[arg(long)]
        src_model: Option<PathBuf>,
        #[arg(long)]
        weight: Option<f64>,
        /// Tag scheme the corpus will be used with (weighted).
        #[arg(long, default_value = "aesc")]
        mode: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Stats { .. } => "stats",
            Command::Train { .. } => "train",
            Command::Crossval { compare: Some(_), .. } => "compare",
            Command::Crossval { .. } => "crossval",
            Command::Eval { .. } => "eval",
            Command::Predict { .. } => "predict",
            Command::Adapt { .. } => "adapt",
        }
    }
}

/// Marks an error as a usage or configuration problem (exit code 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn is_usage(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<Usage>()
            || matches!(c.downcast_ref::<aspectag::Error>(), Some(aspectag::Error::Usage(_)))
            || matches!(
                c.downcast_ref::<aspectag::Error>(),
                Some(aspectag::Error::Model(aspectag::models::ModelError::Config(_)))
            )
            || matches!(c.downcast_ref::<aspectag::models::ModelError>(), Some(aspectag::models::ModelError::Config(_)))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Warn,
        (false, 0) => log::LevelFilter::Info,
        (false, 1) => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .parse_default_env()
        .init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_usage(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
