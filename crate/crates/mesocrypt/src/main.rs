use std::process::ExitCode;

use mesocrypt::{execute, parse_config, CliError};

fn main() -> ExitCode {
    let result = parse_config(std::env::args_os()).and_then(|config| execute(&config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Clap(e)) => e.exit(),
        Err(e) => {
            eprintln!("mesocrypt: {e}");
            e.exit_code()
        }
    }
}
