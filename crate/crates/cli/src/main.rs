use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use l2inv::{render_table, run, Cli, CliError};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.to_string()), &argv),
    };
    match run(&cli, &argv) {
        Ok(report) if cli.table => {
            emit(&render_table(&report));
            ExitCode::SUCCESS
        }
        Ok(report) => {
            emit(&(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"));
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e, &argv),
    }
}

fn fail(e: &CliError, argv: &[String]) -> ExitCode {
    let echo: Vec<String> = argv.iter().skip(1).cloned().collect();
    eprintln!("{}", serde_json::to_string_pretty(&e.to_json(&echo)).expect("error serializes"));
    ExitCode::from(2)
}

// a closed pipe on stdout is not an error worth a panic
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}
