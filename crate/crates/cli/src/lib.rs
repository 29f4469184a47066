//! Command-line front end: reads a scenario config, runs one sweep and
//! publishes the result as CSV.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{ChannelArg, Command, Outcome};
pub use config::Config;
pub use error::{CliError, CliResult};

#[derive(Debug, Clone, Parser)]
#[command(name = "waterslide", version, about = "Total-power bounds and link-density sweeps as CSV")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,

    /// TOML scenario file; every key is optional.
    #[arg(long, short)]
    pub config: Option<PathBuf>,

    /// CSV destination; `<command>.csv` when unset.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    /// `key.path=value`, applied after the file. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Worker threads; all available cores when unset.
    #[arg(long, short, env = "WATERSLIDE_JOBS")]
    pub jobs: Option<usize>,

    /// Channel for `point`.
    #[arg(long, value_enum, default_value = "awgn")]
    pub channel: ChannelArg,
}

/// Loads the config named by `args`, with overrides applied.
pub fn load_config(args: &Args) -> CliResult<Config> {
    let (text, origin) = match &args.config {
        Some(path) => (
            fs::read_to_string(path).map_err(|source| CliError::Io {
                action: "read",
                path: path.clone(),
                source,
            })?,
            path.display().to_string(),
        ),
        None => (String::new(), "defaults".to_string()),
    };
    let mut table: toml::Table = text.parse().map_err(|source| CliError::Parse { origin, source })?;
    config::apply_overrides(&mut table, &args.overrides)?;
    Config::from_table(table)
}

/// Runs one command to completion. Tables go to the output path, text to stdout.
pub fn run(args: &Args) -> CliResult<()> {
    let config = load_config(args)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.jobs {
        if n == 0 {
            return Err(CliError::config("--jobs", "must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Pool(e.to_string()))?;
    let outcome = pool.install(|| commands::execute(args.command, &config, args.channel))?;
    match outcome {
        Outcome::Table(table) => {
            let path = args
                .output
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}.csv", args.command.name())));
            output::publish(&path, &table, args.command.name(), &config.digest())
        }
        Outcome::Text(text) => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    action: "write",
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}
