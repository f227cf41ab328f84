mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use defvec::Task;

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

/// Word vectors from dictionary definitions rendered as images.
#[derive(Debug, Parser)]
#[command(name = "defvec", version)]
struct Cli {
    /// Pipeline configuration file (`key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Overrides the `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Only log errors.
    #[arg(long, short, global = true)]
    quiet: bool,

    /// Overrides one config key; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Writes the vocabulary export and the skip report.
    BuildVocab,
    /// Trains the autoencoder and writes a checkpoint and loss CSV.
    Train,
    /// Writes the embedding table for the base vocabulary.
    Embed,
    /// Scores the table on one benchmark.
    Eval {
        /// similarity, outlier or categorize
        task: String,
    },
}

fn load_config(cli: &Cli) -> CliResult<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    for pair in &cli.set {
        cfg.set_pair(pair)?;
    }
    if let Some(seed) = cli.seed {
        cfg.train.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::BuildVocab => commands::build_vocab(&cfg),
        Command::Train => commands::train_model(&cfg),
        Command::Embed => commands::embed(&cfg),
        Command::Eval { task } => {
            let task: Task = task.parse()?;
            let report = commands::eval(&cfg, task)?;
            if !cli.quiet {
                print!("{report}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("bad arguments");
            let err = CliError::Validation(first.trim_start_matches("error: ").to_string());
            eprintln!("{err}");
            return ExitCode::from(err.exit_code());
        }
    };

    let mut logger = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"));
    if cli.quiet {
        logger.filter_level(log::LevelFilter::Error);
    }
    logger.format_timestamp(None).init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}
