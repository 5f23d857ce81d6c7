//! `sylgen`: tokenize, train, sample from and evaluate syllable-level
//! Polish language models.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage or input error.

mod commands;
mod pipeline;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "sylgen", version, about = "Syllable-level Polish text generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Seed for every random choice of the command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// key=value file; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Token granularity: subword or char.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Output file or directory (see each command).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Model and training settings.
#[derive(Args, Debug, Clone, Default)]
pub struct TrainArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    /// Tokens per training chunk.
    #[arg(long)]
    pub chunk_len: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub grad_clip: Option<f64>,
    /// Multiplies epochs and hidden size (e.g. 0.1 for quick runs).
    #[arg(long)]
    pub scale: Option<f64>,
    /// Fraction of tokens held out from the end of the corpus for
    /// evaluation.
    #[arg(long)]
    pub holdout: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Text to token stream (stdout unless --out).
    Tokenize {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Token stream to text (stdout unless --out).
    Detokenize {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train a model; --out names the run directory (default `run`).
    Train {
        corpus: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Sample text from a checkpoint (stdout unless --out).
    Generate {
        checkpoint: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Text fed through the model before sampling.
        #[arg(long)]
        prime: Option<String>,
        /// Number of tokens to generate.
        #[arg(long)]
        length: Option<usize>,
        #[arg(long, short = 't')]
        temperature: Option<f64>,
        /// Always pick the most probable token.
        #[arg(long)]
        argmax: bool,
        /// Also write the generated token stream here.
        #[arg(long, value_name = "FILE")]
        tokens_out: Option<PathBuf>,
    },
    /// Score a checkpoint on a corpus (stdout unless --out).
    Eval {
        checkpoint: PathBuf,
        corpus: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Tokens per chunk when computing loss.
        #[arg(long)]
        chunk_len: Option<usize>,
    },
    /// Train sub-word and character models on one corpus and report both;
    /// --out names the report directory (default `compare`).
    Compare {
        corpus: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Print a checkpoint's configuration and sizes.
    InspectCheckpoint {
        checkpoint: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Tokenize { input, common } => commands::tokenize(&input, &common),
        Command::Detokenize { input, common } => commands::detokenize(&input, &common),
        Command::Train {
            corpus,
            common,
            train,
        } => commands::train(&corpus, &common, &train),
        Command::Generate {
            checkpoint,
            common,
            prime,
            length,
            temperature,
            argmax,
            tokens_out,
        } => commands::generate(
            &checkpoint,
            &common,
            commands::GenerateArgs {
                prime,
                length,
                temperature,
                argmax,
                tokens_out,
            },
        ),
        Command::Eval {
            checkpoint,
            corpus,
            common,
            chunk_len,
        } => commands::eval(&checkpoint, &corpus, &common, chunk_len),
        Command::Compare {
            corpus,
            common,
            train,
        } => commands::compare(&corpus, &common, &train),
        Command::InspectCheckpoint { checkpoint, common } => {
            commands::inspect(&checkpoint, &common)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
