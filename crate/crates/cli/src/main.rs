use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use spd_eiv_cli::{run, Cli, EXIT_INVALID};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(outcome) => {
            if let Some(text) = outcome.stdout {
                let _ = std::io::stdout().write_all(text.as_bytes());
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("spd-eiv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
