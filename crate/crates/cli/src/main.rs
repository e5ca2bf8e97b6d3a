use std::process::ExitCode;

use clap::Parser;

use ampcap_cli::app::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("ampcap: {e}");
            ExitCode::from(2)
        }
    }
}
