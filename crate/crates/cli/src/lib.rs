//! Batch front-end for `qdcert`.
//!
//! Every subcommand runs one pipeline and produces a single report: JSON by
//! default (keys sorted, floats rounded to 12 significant digits, a top-level
//! `"schema": 1`), CSV for the tabular outputs. Exit status 0 means the run
//! succeeded, 1 means a mathematical check failed, 2 means bad usage or input.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
pub mod config;
pub mod output;

pub use commands::execute;

#[derive(Parser, Debug, Clone)]
#[command(name = "qdcert", version, about = "Quasidiagonality certificates and finite-quotient witnesses")]
pub struct Cli {
    /// TOML file whose keys fill in flags not given on the command line.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    /// Four pieces, bound 1/2.
    Standard,
    /// Five pieces, bound 1/3.
    Split,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfInstance {
    Abels,
    Heisenberg,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Sphere sizes |S_n| and first-letter class sizes in the free group.
    Spheres {
        #[arg(long, default_value_t = 5)]
        radius: usize,
    },
    /// Pairing of the sphere vector ξ_n with its translates.
    Xi {
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Ball radius for the numeric check (defaults to n + 1).
        #[arg(long)]
        radius: Option<usize>,
    },
    /// ‖[λ_x, P_ξn]‖ computed through the general sparse route.
    Commutator {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value = "a")]
        generator: String,
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Paradoxical-decomposition certificates.
    Paradox {
        #[command(subcommand)]
        action: ParadoxAction,
    },
    /// Lower bound on C_F from a verified certificate.
    CfLower {
        #[arg(long, value_enum, default_value_t = CertificateKind::Standard)]
        certificate: CertificateKind,
        #[arg(long, default_value_t = 6)]
        radius: usize,
    },
    /// Upper bound on C_F by optimizing radial profiles.
    CfUpper {
        #[arg(long, default_value_t = 20)]
        dim: usize,
        /// Cross-check the optimum on a ball of this radius (needs > dim).
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Randomized check of |Tr(QX)| ≤ ½ rank(X) ‖X‖.
    TraceLemma {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        max_dim: usize,
    },
    /// Replays the lower-bound argument on random projections.
    QrAudit {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        max_rank: usize,
        #[arg(long, default_value_t = 6)]
        support: usize,
    },
    /// Representation induced from a character of a central subgroup.
    Induce {
        /// cyclic:N | heisenberg-mod:p | table:FILE
        #[arg(long)]
        group: String,
        /// center | gen:INDEX
        #[arg(long, default_value = "center")]
        subgroup: String,
        /// γ(h^i) = e^{2πi k i/|H|} for the chosen generator h.
        #[arg(long = "char", default_value_t = 1)]
        character: i64,
    },
    /// Residually-finite MF witness pipeline.
    Mf {
        #[command(subcommand)]
        action: MfAction,
    },
    /// LEF witness for a ball of the free group in SL₂(ℤ/m).
    Lef {
        #[arg(long, default_value = "free2")]
        instance: String,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        /// A range `A..B` (inclusive) or a comma list; defaults to 2..64.
        #[arg(long)]
        moduli_schedule: Option<String>,
        /// Write the witness file here.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug, Clone)]
pub enum ParadoxAction {
    /// Check all three decompositions on a ball.
    Verify {
        #[arg(long, default_value_t = 8)]
        radius: usize,
        #[arg(long, value_enum, default_value_t = CertificateKind::Standard)]
        certificate: CertificateKind,
    },
}

#[derive(Subcommand, Debug, Clone)]
pub enum MfAction {
    Run {
        #[arg(long, value_enum)]
        instance: MfInstance,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, value_delimiter = ',')]
        moduli: Option<Vec<u64>>,
        /// Defaults to the length of the modulus schedule.
        #[arg(long)]
        stages: Option<usize>,
        /// Probe elements, one per line, in the instance's element format.
        #[arg(long)]
        probes: Option<PathBuf>,
        #[arg(long, default_value_t = qdcert::mflef::DEFAULT_DIM_CAP)]
        dim_cap: usize,
    },
}

/// The rendered report and the exit status it implies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub body: String,
    pub status: i32,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, input files or parameters (exit 2).
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Parses arguments (after merging the config file) and runs the command.
pub fn run_args<I, T>(args: I) -> Result<Outcome, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let merged = config::merge_config(&args)?;
    let cli = Cli::try_parse_from(&merged).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(&cli)
}
