use std::fs;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use cleanup_harness::replay::{parse_replay, pretty_print};
use cleanup_harness::{parse_config, run_experiment, ExperimentSpec};

/// Cleanup gridworld experiments with hidden identities and teams.
///
/// Log verbosity is read from `CLEANUP_LOG` (error, warn, info, debug, trace).
#[derive(Parser)]
#[command(name = "cleanup", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seed sweep and write results under the output directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated list overriding `[experiment] seeds`.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        episodes: Option<u32>,
        /// Write one replay file per episode.
        #[arg(long)]
        replay: bool,
        /// Write per-step CSV timeseries.
        #[arg(long)]
        timeseries: bool,
    },
    /// Check a config and print its effective form and hash.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Pretty-print a replay file.
    Replay {
        #[arg(long)]
        file: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CLEANUP_LOG", "warn")).init();
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            seeds,
            episodes,
            replay,
            timeseries,
        } => {
            let mut spec = load(&config)?;
            if let Some(out) = out {
                spec.output_dir = out;
            }
            if let Some(seeds) = seeds {
                spec.seeds = seeds;
            }
            if let Some(e) = episodes {
                spec.episodes = e;
            }
            spec.write_replays |= replay;
            spec.write_timeseries |= timeseries;
            let summary = run_experiment(&spec)?;
            print!("{}", summary.report());
            println!("output {}", spec.output_dir.display());
        }
        Command::Validate { config } => {
            let spec = load(&config)?;
            spec.validate().context("config is invalid")?;
            print!("{}", spec.to_toml());
            println!("# config_hash {}", spec.config_hash());
        }
        Command::Replay { file } => {
            let f = fs::File::open(&file).with_context(|| format!("opening {}", file.display()))?;
            let replay = parse_replay(BufReader::new(f)).with_context(|| format!("in {}", file.display()))?;
            let stdout = io::stdout();
            let mut out = stdout.lock();
            match pretty_print(&replay, &mut out).and_then(|_| out.flush()) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}
