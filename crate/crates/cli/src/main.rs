use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    match axledet::run(axledet::Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
