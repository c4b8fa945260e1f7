use std::process::ExitCode;

use clap::Parser;
use nearcut_cli::app::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version go to stdout with status 0; usage errors share
            // status 1 with every other failure.
            let _ = err.print();
            return ExitCode::from(u8::from(err.use_stderr()));
        }
    };
    match run(&cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
