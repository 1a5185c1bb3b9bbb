use std::process::ExitCode;

use clap::Parser;

use bilinear_cli::{execute, Cli};

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => {
            eprintln!("bm: an asserted check failed");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("bm: error: {e}");
            ExitCode::from(2)
        }
    }
}
