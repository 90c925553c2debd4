use std::io::Write;
use std::process::ExitCode;

use qdcert_cli::{config, Cli, CliError};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let merged = match config::merge_config(&args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    // clap prints help/version and usage errors itself (exit 0 / 2)
    let cli = <Cli as clap::Parser>::try_parse_from(&merged).unwrap_or_else(|e| e.exit());
    match qdcert_cli::execute(&cli) {
        Ok(outcome) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &outcome.body).map_err(|e| format!("{}: {e}", path.display())),
                None => std::io::stdout().write_all(outcome.body.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(outcome.status as u8)
        }
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
