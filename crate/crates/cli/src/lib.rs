//! Command-line front end: subgroup checks, exhaustive scans, series tests
//! and deficient-subset extraction, with JSON or text reports.

mod args;
mod commands;
mod report;
mod scan;

use std::ffi::OsString;
use std::fs;
use std::io::Write;

use clap::Parser;
use cuspcert_core::io::InputError;
use cuspcert_core::Error;

pub use args::{Cli, Command, Format, ModeArg, SeriesCheck};
pub use report::Envelope;
pub use scan::{scan, ScanConfig, ScanReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input, bad flags or violated preconditions.
    Input(String),
    /// An invariant the theory guarantees did not hold.
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InternalProofDeviation(_)
            | Error::NoCuspLocated
            | Error::UnstableFit(_)
            | Error::SquarefreeViolation { .. }
            | Error::NotAnomalousConsistent { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// Finished command output: the rendered report and its exit code.
pub struct Outcome {
    pub text: String,
    pub code: u8,
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Parses `args` (program name first), runs the command and writes the
/// report to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match commands::execute(&cli) {
        Ok(outcome) => {
            let _ = out.write_all(outcome.text.as_bytes());
            outcome.code
        }
        Err(e) => {
            let kind = match e {
                CliError::Input(_) => "input error",
                CliError::Internal(_) => "internal invariant violation",
            };
            let msg = match &e {
                CliError::Input(m) | CliError::Internal(m) => m,
            };
            let _ = writeln!(err, "cuspcert: {kind}: {msg}");
            e.code()
        }
    }
}

/// Convenience wrapper collecting stdout, stderr and the exit code.
pub fn run_capture<I, T>(args: I) -> (u8, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(args, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).expect("utf-8 report"),
        String::from_utf8(err).expect("utf-8 diagnostics"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_kinds_map_to_exit_codes() {
        assert_eq!(CliError::from(Error::NoCuspLocated).code(), EXIT_INTERNAL);
        assert_eq!(CliError::from(Error::InternalProofDeviation("x".into())).code(), EXIT_INTERNAL);
        assert_eq!(CliError::from(Error::UnstableFit("x".into())).code(), EXIT_INTERNAL);
        assert_eq!(CliError::from(Error::CuspCountMismatch { left: 1, right: 2 }).code(), EXIT_INPUT);
    }
}
