use std::process::ExitCode;

use cityfreight_cli::{run, write_output, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|text| write_output(cli.output.as_deref(), &text));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
