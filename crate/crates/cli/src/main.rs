use std::process::ExitCode;

use clap::Parser;
use qmeasure::commands::run;
use qmeasure::{Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = RunConfig::from_cli(&cli.command).and_then(|config| run(&config));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qmeasure: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
