use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use bhdd_core::harness::{self, HarnessError};
use clap::Parser;

/// Random-matrix experiments on black-hole radiation and double descent.
#[derive(Debug, Parser)]
#[command(name = "bhdd", version)]
struct Cli {
    /// One of mp, page, descent, quantum, figure1.
    command: String,
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; metadata goes next to it as <name>.meta.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parameter overrides, e.g. n=400 alphas=0.5,2.
    overrides: Vec<String>,
}

fn report(err: &HarnessError) {
    let color = std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stderr().is_terminal();
    let tag = if color { "\x1b[1;31merror\x1b[0m" } else { "error" };
    eprintln!("{tag}: {err}");
    let mut source = std::error::Error::source(err);
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = harness::config_from_args(
        &cli.command,
        cli.config.as_deref(),
        cli.seed,
        cli.out.as_deref(),
        &cli.overrides,
    )
    .and_then(|cfg| harness::run(&cfg));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.data_path.display());
            println!("{}", outcome.metadata_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
