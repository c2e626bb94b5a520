//! Library side of the `nc-retract` command-line tool.
//!
//! [`run`] takes a [`RunConfig`] and produces an [`Outcome`]: the text for
//! standard output, the CSV files to write, and a [`Report`] of checks whose
//! pass/fail state decides the exit code. Nothing here touches the file
//! system except model loading; [`execute`] writes the outputs.

use std::fmt;
use std::fs;
use std::path::PathBuf;

use ncretract::report::Report;
use ncretract::{catalog, ncmodel, Error};

mod args;
mod commands;
mod point;

pub use args::{parse_args, Cli};
pub use point::{parse_point, PointSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Describe,
    Stratify,
    Cut,
    Retract,
    Flow,
    Fibre,
    Milnor,
    AlphaFibre,
    Check,
    Trivialize,
}

/// Everything a run depends on. Equal configs give byte-identical outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// A file path, or `builtin:NAME` for a catalog model.
    pub model: Option<String>,
    pub at: Option<String>,
    pub level: Option<f64>,
    pub exponents: Option<Vec<u32>>,
    pub stratification: Option<String>,
    pub seed: u64,
    pub samples: usize,
    /// Local error tolerance of the flow integrator.
    pub tol: Option<f64>,
    pub numeric: bool,
    pub real: bool,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> RunConfig {
        RunConfig {
            command,
            model: None,
            at: None,
            level: None,
            exponents: None,
            stratification: None,
            seed: 1,
            samples: 200,
            tol: None,
            numeric: false,
            real: false,
            out: None,
            trace: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Io,
    Parse,
    Computation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(m: impl Into<String>) -> CliError {
        CliError { kind: ErrorKind::Usage, message: m.into() }
    }

    pub fn io(m: impl Into<String>) -> CliError {
        CliError { kind: ErrorKind::Io, message: m.into() }
    }

    pub fn parse(m: impl Into<String>) -> CliError {
        CliError { kind: ErrorKind::Parse, message: m.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Usage => exit::USAGE,
            ErrorKind::Io => exit::IO,
            ErrorKind::Parse => exit::PARSE,
            ErrorKind::Computation => exit::COMPUTATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        let kind = match e {
            Error::Parse { .. } | Error::Schema { .. } => ErrorKind::Parse,
            _ => ErrorKind::Computation,
        };
        CliError { kind, message: e.to_string() }
    }
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECKS_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const PARSE: i32 = 4;
    pub const COMPUTATION: i32 = 5;
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
    pub report: Report,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed() {
            exit::OK
        } else {
            exit::CHECKS_FAILED
        }
    }
}

/// Reads a model from a path, or from the catalog for `builtin:NAME`.
pub fn load_model(source: &str) -> Result<ncmodel::NCModel, CliError> {
    if let Some(name) = source.strip_prefix("builtin:") {
        if !catalog::names().contains(&name) {
            return Err(CliError::usage(format!(
                "unknown builtin model {name:?}; available: {}",
                catalog::names().join(", ")
            )));
        }
        return Ok(catalog::load(name)?);
    }
    let text = fs::read_to_string(source).map_err(|e| CliError::io(format!("cannot read model {source}: {e}")))?;
    Ok(ncmodel::load_model(&text)?)
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    commands::dispatch(config)
}

/// Runs and writes every output file; returns the process exit code.
pub fn execute(config: &RunConfig) -> i32 {
    let outcome = match run(config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    print!("{}", outcome.stdout);
    for (path, content) in &outcome.files {
        if let Err(e) = fs::write(path, content) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return exit::IO;
        }
    }
    outcome.exit_code()
}
