mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Failure;

/// Caps rayon's pool from `DPO_SIM_THREADS`.
fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("DPO_SIM_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Validation(format!("DPO_SIM_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Validation(format!("thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    init_threads()?;
    match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Stability(a) => commands::stability(a),
        Command::StabilityMap(a) => commands::stability_map_cmd(a),
        Command::Dde(a) => commands::dde_cmd(a),
        Command::Verify(a) => commands::verify(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
