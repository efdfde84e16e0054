//! Command-line driver: certificate sweeps, numerical recovery, overbound
//! sweeps, tensor decomposition, bound tables, certificate verification and
//! proof-structure checks.

pub mod commands;
pub mod rows;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rankone_core::certify::TestType;
use rankone_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// A certificate, check or decomposition did not hold up.
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 0 success, 1 verification failure, 2 usage error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(
                Error::Shape(_)
                | Error::Spec(_)
                | Error::Bound(_)
                | Error::Precondition(_)
                | Error::NotPrime(_)
                | Error::Capacity { .. }
                | Error::Mode(_),
            ) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rankone", version, about = "Planted rank-1 detection: certificates, recovery and tensor decomposition")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Directory holding certificates/, numerical/ and log/.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestTypeArg {
    All,
    Null,
    Cpd,
}

impl From<TestTypeArg> for TestType {
    fn from(t: TestTypeArg) -> Self {
        match t {
            TestTypeArg::All => TestType::All,
            TestTypeArg::Null => TestType::Null,
            TestTypeArg::Cpd => TestType::Cpd,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify every case of a sweep over F_p and write the certificate CSV.
    Certify(CertifyArgs),
    /// Run the numerical pipeline on one case and print its row.
    Recover(RecoverArgs),
    /// Run the numerical pipeline one past the boundary for every shape.
    Overbound(OverboundArgs),
    /// Decompose a planted or file-provided tensor.
    Tensor(TensorArgs),
    /// Print the boundary values for one shape.
    Bounds(BoundsArgs),
    /// Recompute every certificate in a CSV file.
    Verify(VerifyArgs),
    /// Check the block structure of the square submatrix M''.
    Proofcheck(ProofcheckArgs),
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, value_enum)]
    pub test_type: TestTypeArg,
    #[arg(long)]
    pub sym: bool,
    #[arg(long, default_value_t = 0)]
    pub bound_min: u32,
    #[arg(long)]
    pub bound_max: u32,
    #[arg(long, default_value_t = 997)]
    pub prime: u64,
    #[arg(long, default_value_t = 16)]
    pub max_resamples: u32,
    /// With `all`, certify every admissible (s, R) instead of the boundary.
    #[arg(long)]
    pub exhaustive: bool,
    /// Output file; defaults to certificates/<conventional name>.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long)]
    pub m: usize,
    /// Defaults to m.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub s: usize,
    #[arg(long = "R")]
    pub r: usize,
    #[arg(long)]
    pub sym: bool,
}

#[derive(Debug, Args)]
pub struct OverboundArgs {
    #[arg(long, default_value_t = 0)]
    pub bound_min: u32,
    #[arg(long)]
    pub bound_max: u32,
    #[arg(long)]
    pub sym: bool,
    /// Only used in the file name.
    #[arg(long, default_value_t = 997)]
    pub prime: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TensorArgs {
    /// 3 or 4; taken from the file header with --in-file.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, num_args = 1..=4)]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub rank: usize,
    /// Symmetric order-4 tensor; --dims takes n alone or four equal values.
    #[arg(long)]
    pub sym: bool,
    #[arg(long)]
    pub in_file: Option<PathBuf>,
    /// Run above the rank bound.
    #[arg(long)]
    pub override_bound: bool,
    /// Factor CSV; defaults to numerical/tensor_factors.csv.
    #[arg(long)]
    pub factors_out: Option<PathBuf>,
    /// Also write the planted tensor in the text format.
    #[arg(long)]
    pub tensor_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sym: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub file: PathBuf,
    /// Symmetric certificates; implied by `_sym` in the file name.
    #[arg(long)]
    pub sym: bool,
}

#[derive(Debug, Args)]
pub struct ProofcheckArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long = "R")]
    pub r: usize,
    #[arg(long, default_value_t = 997)]
    pub prime: u64,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Gaussian assignments instead of F_p.
    #[arg(long)]
    pub real: bool,
}

/// Runs a parsed command, printing to `out`.
pub fn run(cli: &Cli, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Certify(a) => commands::certify(g, a, out),
        Command::Recover(a) => commands::recover(g, a, out),
        Command::Overbound(a) => commands::overbound(g, a, out),
        Command::Tensor(a) => commands::tensor(g, a, out),
        Command::Bounds(a) => commands::bounds(a, out),
        Command::Verify(a) => commands::verify(a, out),
        Command::Proofcheck(a) => commands::proofcheck(g, a, out),
    }
}
