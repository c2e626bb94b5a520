use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::point::parse_exponents;
use crate::{CliError, Command, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "nc-retract",
    version,
    about = "Retractions of normal-crossings degenerations onto their central fibre"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,

    /// Model file, or builtin:NAME for a catalog model.
    #[arg(long, global = true)]
    pub model: Option<String>,

    /// Point: a special point name, CHART:c1,c2,..., chart:CHART;x=c1,..., or ambient c1,c2,...
    #[arg(long, global = true)]
    pub at: Option<String>,

    /// Alias of --at.
    #[arg(long, global = true)]
    pub point: Option<String>,

    /// Level c of the nearby fibre (an angle for alpha-fibre).
    #[arg(short = 'c', long, global = true, allow_negative_numbers = true)]
    pub level: Option<f64>,

    /// Comma-separated exponents, e.g. 2,3.
    #[arg(long, global = true)]
    pub exponents: Option<String>,

    /// Declared stratification to check with condition3 (default: all).
    #[arg(long, global = true)]
    pub stratification: Option<String>,

    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, global = true, default_value_t = 200)]
    pub samples: usize,

    /// Local error tolerance of the flow integrator.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Integrate the retraction field instead of using the closed form.
    #[arg(long, global = true)]
    pub numeric: bool,

    /// Treat the fibre over a real point (fibre subcommand).
    #[arg(long, global = true)]
    pub real: bool,

    /// CSV output path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// CSV path for the sampled flow line (flow subcommand).
    #[arg(long, global = true)]
    pub trace: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum Sub {
    /// Charts, components, dual complex and sidedness of a model.
    Describe,
    /// Canonical stratification of the central fibre.
    Stratify,
    /// Fibre of the cut space over a chart point.
    Cut,
    /// Retract a point onto the central fibre.
    Retract,
    /// Integrate the retraction field from a point.
    Flow,
    /// Nearby fibre retracting to a point.
    Fibre,
    /// Euler characteristic and components of a Milnor fibre.
    Milnor,
    /// Components of a level set of sum a_i alpha_i on a torus.
    AlphaFibre,
    /// Full invariant suite over a model, or the whole catalog.
    Check,
    /// Trivialization coordinates (retracted point, level) of a point.
    Trivialize,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Command {
        match s {
            Sub::Describe => Command::Describe,
            Sub::Stratify => Command::Stratify,
            Sub::Cut => Command::Cut,
            Sub::Retract => Command::Retract,
            Sub::Flow => Command::Flow,
            Sub::Fibre => Command::Fibre,
            Sub::Milnor => Command::Milnor,
            Sub::AlphaFibre => Command::AlphaFibre,
            Sub::Check => Command::Check,
            Sub::Trivialize => Command::Trivialize,
        }
    }
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        if self.at.is_some() && self.point.is_some() {
            return Err(CliError::usage("--at and --point are the same option; give one"));
        }
        Ok(RunConfig {
            command: self.command.into(),
            model: self.model,
            at: self.at.or(self.point),
            level: self.level,
            exponents: self.exponents.as_deref().map(parse_exponents).transpose()?,
            stratification: self.stratification,
            seed: self.seed,
            samples: self.samples,
            tol: self.tol,
            numeric: self.numeric,
            real: self.real,
            out: self.out,
            trace: self.trace,
        })
    }
}

/// Parses a full argument vector, program name first. Help and version
/// requests come back as clap errors, which know their own exit status.
pub fn parse_args<I, T>(args: I) -> Result<Result<RunConfig, CliError>, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(args).map(Cli::into_config)
}
