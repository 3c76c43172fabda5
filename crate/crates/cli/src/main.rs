use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use wbc_polar_cli::commands::{self, Globals};
use wbc_polar_cli::config::Suite;
use wbc_polar_cli::error::EXIT_OK;
use wbc_polar_cli::CliError;

/// `println!` that ignores a closed stdout (e.g. when piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// Chained polar coding over the two-receiver wiretap broadcast channel.
#[derive(Debug, Parser)]
#[command(name = "wbc-polar", version)]
struct Cli {
    /// Experiment config (TOML or JSON, chosen by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for trials and sampling. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Directory of cached frozen sets.
    #[arg(long, global = true)]
    sets_cache: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suite to run (repeatable); overrides the config.
    #[arg(long = "suite", global = true, value_enum)]
    suites: Vec<Suite>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the sets and chaining plan and print a JSON summary.
    Construct,
    /// Encode one session and sample its channel outputs.
    Encode {
        /// Messages to send (JSON); generated from the seed when absent.
        #[arg(long)]
        messages: Option<PathBuf>,
        /// Leave the keys out of the artifact (they are still written to keys.json).
        #[arg(long)]
        withhold_keys: bool,
    },
    /// Decode a session artifact for both receivers.
    Decode {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long)]
        observations: PathBuf,
        /// Keys to use instead of those in the artifact.
        #[arg(long)]
        keys: Option<PathBuf>,
        /// Reference messages; enables the per-block correctness report.
        #[arg(long)]
        messages: Option<PathBuf>,
    },
    /// Run evaluation suites and write JSON and CSV reports.
    Run,
    /// Summarize the suite reports in a directory.
    Report {
        /// Report directory; defaults to --out.
        dir: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let g = Globals {
        config: cli.config,
        seed: cli.seed,
        workers: cli.workers.max(1),
        sets_cache: cli.sets_cache,
        out: cli.out,
        suites: cli.suites,
    };
    match cli.command {
        Command::Construct => {
            let summary = commands::construct(&g)?;
            say!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
        }
        Command::Encode { messages, withhold_keys } => {
            let s = commands::encode(&g, messages.as_deref(), withhold_keys)?;
            let d = s.dimensions;
            say!("case {}, {} blocks", s.case, d.blocks);
            say!(
                "private {} bits/block, confidential {}/{}/{} bits (first/middle/last)",
                d.private, d.confidential_first, d.confidential_mid, d.confidential_last
            );
            let keys = if s.keys_withheld { "withheld from artifact" } else { "included in artifact" };
            say!("keys {keys}; wrote {}", s.dir.display());
        }
        Command::Decode {
            artifact,
            observations,
            keys,
            messages,
        } => {
            let r = commands::decode(&g, &artifact, &observations, keys.as_deref(), messages.as_deref())?;
            for rx in &r.receivers {
                let covered = rx.blocks.iter().filter(|b| b.side_info_covered).count();
                let verdict = match rx.all_correct {
                    Some(true) => "all blocks correct".to_string(),
                    Some(false) => {
                        let bad: Vec<String> = rx
                            .blocks
                            .iter()
                            .filter(|b| b.private_correct != Some(true) || b.confidential_correct != Some(true))
                            .map(|b| b.block.to_string())
                            .collect();
                        format!("mismatch in block(s) {}", bad.join(", "))
                    }
                    None => "no reference messages".to_string(),
                };
                say!(
                    "receiver {}: {verdict}; side information covered {covered}/{} blocks",
                    rx.receiver,
                    rx.blocks.len()
                );
            }
        }
        Command::Run => {
            commands::run(&g, |o| say!("{}: {}", o.suite.name(), o.summary))?;
        }
        Command::Report { dir } => {
            let dir = dir
                .or(g.out.clone())
                .ok_or_else(|| CliError::Config("report needs a directory".into()))?;
            say!("{}", commands::report(&dir)?.trim_end());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
