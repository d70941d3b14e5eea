use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use tori_cli::{execute, parse_config};

/// Invariant tori of partially integrable Hamiltonian systems.
#[derive(Debug, Parser)]
#[command(name = "tori", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Artifact directory; overrides `output` in the configuration.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    /// Log progress to standard error.
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose {
        log::LevelFilter::Info
    } else {
        log::LevelFilter::Warn
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();

    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let dir = args
        .output
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match execute(&cfg, &text, &dir) {
        Ok(outcome) => {
            println!(
                "{}: {}",
                if outcome.pass { "pass" } else { "fail" },
                outcome.summary
            );
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
