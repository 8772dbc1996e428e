//! Command-line front end: `discover`, `capacity`, `pathinfo`, `simulate`.
//!
//! Every subcommand computes all of its outputs before anything is written,
//! so a failing run leaves no partial files behind. Errors go to stderr as a
//! single JSON object; exit codes are 1 for I/O, 2 for invalid input and 3
//! for internal failures.

mod commands;
mod error;

use std::ffi::OsString;
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_capacity, cmd_discover, cmd_pathinfo, cmd_simulate, PathInfoOutput};
pub use error::{CliError, ErrorKind};

#[derive(Debug, Parser)]
#[command(name = "infoskel", version, about = "Causal skeleton discovery with channel capacities")]
pub struct Cli {
    /// Worker threads for pairwise estimation and path capacities.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discover the skeleton of a categorical dataset.
    Discover(DiscoverArgs),
    /// Tensors, capacities and mutual information of one variable pair.
    Capacity(CapacityArgs),
    /// Information carried along an ordered path of variables.
    Pathinfo(PathinfoArgs),
    /// Sample a Bayesian network description to CSV.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file with one column per variable.
    #[arg(long, short)]
    pub input: PathBuf,

    #[arg(long, default_value_t = ',')]
    pub delimiter: char,

    /// The first row holds data; columns are named V1, V2, ...
    #[arg(long)]
    pub no_header: bool,

    /// Keep only these columns, in this order.
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,

    /// Reject columns with more distinct values than this.
    #[arg(long)]
    pub cardinality_cap: Option<usize>,
}

/// Discovery settings. Flags take precedence over the `--config` file and
/// carry the same names as its fields.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON file with discovery settings.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub alpha: Option<f64>,

    #[arg(long = "max_path_len", visible_alias = "max-path-len")]
    pub max_path_len: Option<usize>,

    #[arg(long = "capacity_epsilon", visible_alias = "capacity-epsilon")]
    pub capacity_epsilon: Option<f64>,

    #[arg(long = "ba_tol", visible_alias = "ba-tol")]
    pub ba_tol: Option<f64>,

    #[arg(long = "ba_max_iter", visible_alias = "ba-max-iter")]
    pub ba_max_iter: Option<usize>,

    #[arg(long = "require_both_orientations", visible_alias = "require-both-orientations")]
    pub require_both_orientations: Option<bool>,

    #[arg(long = "mediator_cell_budget", visible_alias = "mediator-cell-budget")]
    pub mediator_cell_budget: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub config: ConfigArgs,

    /// Write the DOT graph here instead of standard output.
    #[arg(long)]
    pub dot: Option<PathBuf>,

    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Draw pruned edges dashed.
    #[arg(long)]
    pub show_pruned: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub config: ConfigArgs,

    #[arg(long)]
    pub x: String,

    #[arg(long)]
    pub y: String,
}

#[derive(Debug, Clone, Args)]
pub struct PathinfoArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub config: ConfigArgs,

    /// Ordered vertices, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub path: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Network description JSON.
    #[arg(long, required_unless_present = "bundled", conflicts_with = "bundled")]
    pub spec: Option<PathBuf>,

    /// Use a bundled network: `chain` or `lucas`.
    #[arg(long)]
    pub bundled: Option<String>,

    /// Number of samples.
    #[arg(long, short)]
    pub n: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Destination CSV.
    #[arg(long, short)]
    pub output: PathBuf,

    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
}

/// Runs a parsed invocation. Output is buffered and reaches `stdout` only
/// if the command succeeds.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let dispatch = || {
        let mut buf = Vec::new();
        match &cli.command {
            Command::Discover(a) => cmd_discover(a, &mut buf),
            Command::Capacity(a) => cmd_capacity(a, &mut buf),
            Command::Pathinfo(a) => cmd_pathinfo(a, &mut buf),
            Command::Simulate(a) => cmd_simulate(a, &mut buf),
        }
        .map(|_| buf)
    };
    let buf = match cli.threads {
        None => dispatch()?,
        Some(0) => return Err(CliError::validation("--threads must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::internal(e.to_string()))?
            .install(dispatch)?,
    };
    stdout.write_all(&buf)?;
    stdout.flush()?;
    Ok(())
}

/// Parses `args`, runs, and reports errors; returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let err = CliError::validation(e.to_string().trim_end());
            let _ = writeln!(stderr, "{}", err.to_json());
            return err.kind.exit_code();
        }
    };
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| run(cli, stdout)));
    let err = match outcome {
        Ok(Ok(())) => return 0,
        Ok(Err(e)) => e,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            CliError::internal(msg)
        }
    };
    let _ = writeln!(stderr, "{}", err.to_json());
    err.kind.exit_code()
}
