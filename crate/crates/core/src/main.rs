use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chreach::experiment::{run_config, ExperimentConfig, RunOptions};
use chreach::Error;
use clap::{Parser, Subcommand};

/// Convex hulls of reachable sets from the boundary of the initial set.
#[derive(Parser)]
#[command(name = "chreach", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; overrides CHREACH_THREADS.
        #[arg(long)]
        threads: Option<usize>,
        /// Number of closed-loop seeds for spacecraft-mpc runs.
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
}

/// `--threads`, then `CHREACH_THREADS`, then one per core.
fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Error> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("CHREACH_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::Config(format!("CHREACH_THREADS must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

/// Reads a config; unreadable files count as configuration errors.
fn load(path: &Path) -> Result<(ExperimentConfig, Vec<u8>, serde_json::Value), Error> {
    let bytes = std::fs::read(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let cfg = ExperimentConfig::from_json(&text, path)?;
    let echo = serde_json::from_str(&text).expect("config parsed above");
    Ok((cfg, bytes, echo))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Validate { config } => {
            let (cfg, _, _) = load(&config)?;
            println!("{}: valid {} config", config.display(), cfg.id());
            Ok(())
        }
        Command::Run {
            config,
            out,
            threads,
            seeds,
        } => {
            let (cfg, bytes, echo) = load(&config)?;
            if seeds == Some(0) {
                return Err(Error::Config("--seeds must be >= 1".into()));
            }
            match thread_count(threads)? {
                Some(0) => return Err(Error::Config("thread count must be >= 1".into())),
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
                None => {}
            }
            let base = config.parent().map(Path::to_path_buf).unwrap_or_default();
            let opts = RunOptions {
                out,
                seeds,
                threads: rayon::current_num_threads(),
            };
            let report = run_config(&cfg, &base, &bytes, echo, &opts)?;
            println!("{} -> {}", report.experiment, report.output_dir.display());
            if report.passed() {
                Ok(())
            } else {
                Err(Error::Invariant(report.failures.join("; ")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
