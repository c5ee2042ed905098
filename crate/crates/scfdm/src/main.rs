//! Command-line front end for the link-level simulator.
//!
//! `scfdm <papr|bler|chanest|golden> --config <file> [--out <dir>]
//! [--seed <u64>] [--format csv|json]`
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 golden-vector
//! mismatch. The `SCFDM_OUT_DIR` environment variable overrides the output
//! directory from both the config file and `--out`.

use clap::{Args, Parser, Subcommand};
use scfdm::harness::{parse_config, run_experiment, ExperimentKind, OutputFormat};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "scfdm",
    about = "Link-level simulator for low-PAPR pi/2-BPSK DFT-s-OFDM uplink transmission"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file (flat key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config `out` key.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides the config `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Output format; overrides the config `format` key.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Per-symbol PAPR sampling reduced to a CCDF.
    Papr(RunArgs),
    /// Block error rate over an SNR grid through the full chain.
    Bler(RunArgs),
    /// Channel-estimation MSE over an SNR grid.
    Chanest(RunArgs),
    /// Frozen reference-vector regression.
    Golden(RunArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Papr(_) => ExperimentKind::Papr,
            Command::Bler(_) => ExperimentKind::Bler,
            Command::Chanest(_) => ExperimentKind::Chanest,
            Command::Golden(_) => ExperimentKind::Golden,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Papr(a) | Command::Bler(a) | Command::Chanest(a) | Command::Golden(a) => a,
        }
    }
}

fn run(cli: &Cli) -> Result<bool, scfdm::Error> {
    let kind = cli.command.kind();
    let args = cli.command.args();
    let mut cfg = parse_config(&args.config, Some(kind))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Ok(dir) = std::env::var("SCFDM_OUT_DIR") {
        cfg.out_dir = PathBuf::from(dir);
    }
    if let Some(format) = &args.format {
        cfg.format = OutputFormat::from_name(format)?;
    }

    let output = run_experiment(&cfg)?;
    let path = output.emit(&cfg.out_dir, cfg.format)?;
    eprintln!(
        "{}: {} records written to {} (seed {})",
        output.kind.name(),
        output.records.len(),
        path.display(),
        output.seed
    );
    Ok(output.golden_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("golden: reference-vector mismatch");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                scfdm::Error::GoldenMismatch(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
