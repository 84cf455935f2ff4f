use std::process::ExitCode;

use clap::Parser;

use prodform_cli::commands::{Cli, EXIT_IO};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = prodform_cli::run(&cli);
    let written = match &cli.out {
        Some(path) => {
            std::fs::write(path, &outcome.output).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => {
            print!("{}", outcome.output);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(EXIT_IO as u8);
    }
    if let Some(d) = outcome.diagnostic {
        eprintln!("error: {d}");
    }
    ExitCode::from(outcome.code as u8)
}
