use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use cryptolink::cli::{execute, parse_window, Command, KindSelection, RunConfig, RunOptions, Status};
use cryptolink::presets::replication_config;

#[derive(Parser)]
#[command(name = "cryptolink", version, about = "Crypto-asset co-movement and connectedness analysis")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// TOML run configuration (defaults to the built-in replication samples)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Restrict the run to one sample
    #[arg(long, global = true)]
    sample: Option<String>,
    /// returns, volatility or both
    #[arg(long, global = true)]
    kind: Option<KindSelection>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory of per-asset OHLC files
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Single analysis window START:END (ISO dates)
    #[arg(long, global = true, value_parser = parse_window)]
    window: Option<(NaiveDate, NaiveDate)>,
    /// Run on a synthetic market drawn with this seed
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Align returns and log-volatility panels
    Ingest,
    /// First principal component per yearly window
    Pca,
    /// Cross-sectional dependence test per yearly window
    Cd,
    /// Static connectedness tables
    Spillover,
    /// Rolling time- and frequency-domain connectedness
    Rolling,
    /// Run every step and write report.json
    Report,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match &args.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => replication_config(),
    };
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    if let Some(data) = args.data {
        config.data_dir = data;
    }
    let command = match args.command {
        Cmd::Ingest => Command::Ingest,
        Cmd::Pca => Command::Pca,
        Cmd::Cd => Command::Cd,
        Cmd::Spillover => Command::Spillover,
        Cmd::Rolling => Command::Rolling,
        Cmd::Report => Command::Report,
    };
    let options = RunOptions { sample: args.sample, kind: args.kind, window: args.window, seed: args.seed };
    let report = match execute(command, &config, &options) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for a in &report.analyses {
        let kind = a.kind.as_deref().map(|k| format!(" {k}")).unwrap_or_default();
        match (&a.status, &a.error) {
            (Status::Ok, _) => eprintln!("{} {}{}: ok, {} file(s)", a.analysis, a.sample, kind, a.files.len()),
            (Status::Failed, e) => eprintln!("{} {}{}: FAILED: {}", a.analysis, a.sample, kind, e.as_deref().unwrap_or("")),
        }
        for w in a.windows.iter().filter(|w| w.status != "ok") {
            eprintln!("  warning: {} {}", w.window, w.status);
        }
    }
    if report.any_failed() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
