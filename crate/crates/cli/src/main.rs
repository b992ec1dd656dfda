use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod error;

use args::Cli;
use error::CliError;

/// Process exit status: 0 equivalent or success, 1 not equivalent, 2 invalid input.
pub enum Status {
    Ok,
    NotEquivalent,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(&CliError::Usage(e.render().to_string().trim().to_string())),
    };
    match commands::run(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NotEquivalent) => ExitCode::from(1),
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    println!("{}", serde_json::json!({ "error": e.to_string() }));
    ExitCode::from(2)
}
