//! Command-line front end: argument parsing, exit codes and output files.

pub mod args;
pub mod commands;
pub mod plot;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use infoextract::format::to_json_string;
use infoextract::Error;

use args::{Cli, Command};
use commands::Context;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NumericalFailure(_) => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

fn error_json(err: &Error) -> serde_json::Value {
    let mut v = serde_json::json!({
        "error": err.kind(),
        "message": err.to_string(),
        "exit_code": exit_code(err),
    });
    if let Error::Parse { line, column, .. } = err {
        v["line"] = (*line).into();
        v["column"] = column.clone().into();
    }
    v
}

fn report_error(json: bool, err: &Error, stderr: &mut dyn Write) {
    if json {
        let _ = writeln!(stderr, "{}", error_json(err));
    } else {
        let _ = writeln!(stderr, "error: {err}");
    }
}

fn init_threads(threads: Option<usize>) -> Result<(), Error> {
    match threads {
        None => Ok(()),
        Some(0) => Err(Error::InvalidInput("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            // an already initialized pool (repeated in-process runs) is fine
            .or(Ok(())),
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<(), Error> {
    let ctx = Context {
        units: cli.units,
        force: cli.force,
        config_json: to_json_string(cli)?,
    };
    let printed = match &cli.command {
        Command::Synth(a) => commands::synth(&ctx, a).map(|_| None),
        Command::Normalize(a) => commands::normalize(&ctx, a).map(|_| None),
        Command::Extract(a) => commands::extract(&ctx, a).map(Some),
        Command::Decouple(a) => commands::decouple_cmd(&ctx, a).map(|_| None),
        Command::Reconstruct(a) => commands::reconstruct(&ctx, a).map(|_| None),
        Command::Mi(a) => commands::mi(&ctx, a).map(Some),
        Command::Dmi(a) => commands::dmi(&ctx, a).map(Some),
        Command::Granger(a) => commands::granger(&ctx, a).map(Some),
        Command::Report(a) => commands::report(&ctx, a).map(|_| None),
    }?;
    if let Some(text) = printed {
        let _ = stdout.write_all(text.as_bytes());
    }
    Ok(())
}

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let json_errors = argv.iter().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    if json_errors {
                        let v = serde_json::json!({
                            "error": "UsageError",
                            "message": e.kind().to_string(),
                            "exit_code": EXIT_INPUT,
                        });
                        let _ = writeln!(stderr, "{v}");
                    } else {
                        let _ = write!(stderr, "{}", e.render());
                    }
                    EXIT_INPUT
                }
            };
        }
    };
    if let Err(e) = init_threads(cli.threads).and_then(|_| dispatch(&cli, stdout)) {
        report_error(cli.json_errors, &e, stderr);
        return exit_code(&e);
    }
    EXIT_OK
}
