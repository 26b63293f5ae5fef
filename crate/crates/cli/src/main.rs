//! Command-line front end.
//!
//! Exit codes: 0 success (or a property that holds), 1 usage error or a
//! property that fails, 2 invalid input or unmet precondition, 3 resource
//! ceiling or inconclusive bounded check, 4 internal invariant violation.

mod commands;
mod render;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coordsynth::Error;

pub const EXIT_FALSE: u8 = 1;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "coordsynth", version, about = "Multilevel coordination control synthesis")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// State ceiling for every construction.
    #[arg(long, global = true, env = "COORDSYNTH_MAX_STATES")]
    pub max_states: Option<usize>,
    /// Iteration ceiling for fixpoint loops.
    #[arg(long, global = true)]
    pub max_iterations: Option<usize>,
    /// Worker threads for per-group and per-seed work.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Synchronous product of automata.
    Product {
        #[arg(required = true)]
        files: Vec<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Natural projection onto a set of events.
    Project {
        file: String,
        /// Comma-separated target events.
        #[arg(long, value_delimiter = ',')]
        events: Vec<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Decide a language property; exit 0 when it holds, 1 when it fails.
    Check(CheckArgs),
    /// Supremal controllable and/or normal sublanguage of K w.r.t. L.
    Supcn(SupcnArgs),
    /// Coordinator for a set of plants.
    Coordinator(CoordinatorArgs),
    /// Run the combined three-level synthesis procedure.
    Synthesize(SynthesizeArgs),
    /// Check a synthesis result against its project.
    Verify(VerifyArgs),
    /// Run the synthesis procedure on random instances and check each.
    Fuzz(FuzzArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Controllable,
    Observable,
    Normal,
    Nonconflicting,
    Observer,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalityArg {
    Standard,
    Literal,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub property: Property,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub l: String,
    /// Uncontrollable events; defaults to the automaton attributes.
    #[arg(long, value_delimiter = ',')]
    pub au: Option<Vec<String>>,
    /// Observable events; defaults to the automaton attributes.
    #[arg(long, value_delimiter = ',')]
    pub ao: Option<Vec<String>>,
    /// Projection target of the observer check.
    #[arg(long, value_delimiter = ',')]
    pub target: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "standard")]
    pub normality: NormalityArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    /// Controllable and normal.
    Cn,
    /// Controllable only.
    C,
    /// Normal only.
    N,
}

#[derive(Args, Debug)]
pub struct SupcnArgs {
    #[arg(long)]
    pub k: String,
    #[arg(long)]
    pub l: String,
    #[arg(long, value_delimiter = ',')]
    pub au: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub ao: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "cn")]
    pub operator: Operator,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct CoordinatorArgs {
    #[arg(required = true)]
    pub plants: Vec<String>,
    /// Initial coordinator events; shared events are always added.
    #[arg(long, value_delimiter = ',')]
    pub events: Vec<String>,
    /// Extend the alphabet until this specification is conditionally
    /// decomposable.
    #[arg(long)]
    pub spec: Option<String>,
    /// Build a coordinator for nonblockingness instead.
    #[arg(long)]
    pub nonblocking: bool,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct SynthesizeArgs {
    #[arg(long)]
    pub project: String,
    #[arg(long)]
    pub out: String,
    #[arg(long, value_enum, default_value = "json")]
    pub report: ReportFormat,
    /// Fail instead of computing a posteriori supervisors when the
    /// sufficient conditions for distributed synthesis do not hold.
    #[arg(long = "strict-theorem3")]
    pub strict_conditions: bool,
    /// Build each group coordinator from the subsystems of its group only.
    #[arg(long)]
    pub group_only_coordinators: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Supremal,
    Properties,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub project: String,
    #[arg(long)]
    pub result: String,
    #[arg(long, value_enum, default_value = "all")]
    pub mode: VerifyMode,
    /// Longest candidate word of the maximality check; defaults to the
    /// longest simple path of the specification.
    #[arg(long)]
    pub max_len: Option<usize>,
}

#[derive(Args, Debug)]
pub struct FuzzArgs {
    /// Seed range `a..b` (end exclusive) or `a..=b`.
    #[arg(long)]
    pub seeds: String,
    /// Instance parameters (JSON); the seed field is ignored.
    #[arg(long)]
    pub params: String,
    /// Write the per-seed records here.
    #[arg(long)]
    pub out: Option<String>,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

pub fn core_exit_code(e: &Error) -> u8 {
    if e.is_resource() {
        return EXIT_RESOURCE;
    }
    match e {
        Error::Step { source, .. } => core_exit_code(source),
        Error::Internal(_) => EXIT_INTERNAL,
        _ => EXIT_INVALID,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(core_exit_code(&e))
        }
    }
}
