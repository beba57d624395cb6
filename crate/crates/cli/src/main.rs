use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod report;

use config::{Format, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "riflab", version, about = "Rational inner functions on the bidisc and their composition operators")]
struct Cli {
    /// TOML run configuration; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample budget per estimate.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Report directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the reflection of a polynomial file.
    Reflect {
        poly: PathBuf,
        /// Output file (stdout when omitted).
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Validate a RIF descriptor and report its singularities.
    RifInfo { rif: PathBuf },
    /// Scan pullback Carleson boxes for a diagonal symbol, or a pair of RIFs.
    Carleson {
        rif: PathBuf,
        rif2: Option<PathBuf>,
    },
    /// Run the three built-in worked examples end to end.
    Examples,
}

/// How a command finished.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    Inconclusive,
}

fn effective_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.sampling.seed = seed;
    }
    if let Some(n) = cli.samples {
        if n == 0 {
            return Err("--samples must be positive".into());
        }
        cfg.sampling.samples = n;
    }
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Outcome, String> {
    let cfg = effective_config(cli)?;
    log::info!("seed {} samples {} out {}", cfg.sampling.seed, cfg.sampling.samples, cfg.output.dir.display());
    match &cli.command {
        Command::Reflect { poly, output } => commands::reflect(poly, output.as_deref()),
        Command::RifInfo { rif } => commands::rif_info(rif, &cfg),
        Command::Carleson { rif, rif2 } => commands::carleson(rif, rif2.as_deref(), &cfg),
        Command::Examples => commands::examples(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on usage errors, which is reserved for inconclusive runs
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Outcome::Completed) => ExitCode::SUCCESS,
        Ok(Outcome::Inconclusive) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
